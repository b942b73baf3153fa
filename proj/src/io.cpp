#include "cmlab/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cmlab {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(Status::format_error, msg); }

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(what + ": " + e.what());
  }
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) bad(where + ": unknown key '" + it.key() + "'");
}

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) bad(where + ": missing '" + key + "'");
  return j.at(key);
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where + ": expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where + ": expected a list of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(num(v, where));
  return out;
}

// Non-finite doubles become null.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json real_list(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

json cmat_json(const CMat& M) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json a = json::array(), b = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      a.push_back(M(r, c).real());
      b.push_back(M(r, c).imag());
    }
    re.push_back(a);
    im.push_back(b);
  }
  return {{"re", re}, {"im", im}};
}

json cvec_json(const CVec& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    re.push_back(v(k).real());
    im.push_back(v(k).imag());
  }
  return {{"re", re}, {"im", im}};
}

RMat rmat(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where + ": expected a nonempty matrix");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  RMat M(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) bad(where + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) M(r, c) = num(j[r][c], where);
  }
  return M;
}

CMat cmat(const json& j, const std::string& where) {
  if (j.is_array()) return rmat(j, where).cast<cplx>();
  allow_keys(j, where, {"re", "im"});
  RMat re = rmat(need(j, where, "re"), where + ".re");
  RMat im = j.contains("im") ? rmat(j["im"], where + ".im") : RMat::Zero(re.rows(), re.cols());
  if (im.rows() != re.rows() || im.cols() != re.cols()) bad(where + ": re/im shapes differ");
  CMat M(re.rows(), re.cols());
  M.real() = re;
  M.imag() = im;
  return M;
}

CVec cvec(const json& j, const std::string& where) {
  if (j.is_array()) {
    auto v = numbers(j, where);
    CVec out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out(k) = v[k];
    return out;
  }
  allow_keys(j, where, {"re", "im"});
  auto re = numbers(need(j, where, "re"), where + ".re");
  std::vector<double> im = j.contains("im") ? numbers(j["im"], where + ".im") : std::vector<double>(re.size(), 0.0);
  if (im.size() != re.size()) bad(where + ": re/im lengths differ");
  CVec out(re.size());
  for (std::size_t k = 0; k < re.size(); ++k) out(k) = cplx(re[k], im[k]);
  return out;
}

json domain_json(const SmoothDomain& d) {
  switch (d.kind()) {
    case SmoothDomain::Kind::ball:
      return {{"kind", "ball"}, {"params", {{"radius", d.radius()}, {"center", cvec_json(d.center())}}}};
    case SmoothDomain::Kind::ellipsoid:
      return {{"kind", "ellipsoid"}, {"params", {{"H", cmat_json(d.H())}, {"center", cvec_json(d.center())}}}};
    default:
      if (d.name() == "dumbbell" && d.params().size() == 2)
        return {{"kind", "dumbbell"}, {"params", {{"a", d.params()[0]}, {"b", d.params()[1]}}}};
      throw Error(Status::invalid_argument, "domain '" + d.name() + "' has no file representation");
  }
}

SmoothDomain domain_from(const json& j, int n, const std::string& where) {
  allow_keys(j, where, {"kind", "params"});
  const json& kind = need(j, where, "kind");
  if (!kind.is_string()) bad(where + ".kind: expected a string");
  const json& p = need(j, where, "params");
  const std::string k = kind.get<std::string>(), pw = where + ".params";
  auto center = [&] {
    Point c = p.contains("center") ? cvec(p["center"], pw + ".center") : Point(Point::Zero(n));
    if (c.size() != n) bad(pw + ".center: expected " + std::to_string(n) + " coordinates");
    return c;
  };
  if (k == "ball") {
    allow_keys(p, pw, {"radius", "center"});
    return SmoothDomain::ball(center(), num(need(p, pw, "radius"), pw + ".radius"));
  }
  if (k == "ellipsoid") {
    allow_keys(p, pw, {"H", "center"});
    CMat H = cmat(need(p, pw, "H"), pw + ".H");
    if (H.rows() != n || H.cols() != n) bad(pw + ".H: expected " + std::to_string(n) + "x" + std::to_string(n));
    return SmoothDomain::ellipsoid(H, center());
  }
  if (k == "dumbbell") {
    allow_keys(p, pw, {"a", "b"});
    if (n != 2) bad(where + ": dumbbell domains have n = 2");
    return SmoothDomain::dumbbell(num(need(p, pw, "a"), pw + ".a"), num(need(p, pw, "b"), pw + ".b"));
  }
  bad(where + ".kind: unknown domain kind '" + k + "'");
}

json ring_json(const RingDomain& r) {
  return {{"n", r.n()}, {"samples", r.sample_count()}, {"omega0", domain_json(r.omega0())},
          {"omega1", domain_json(r.omega1())}};
}

RingDomain ring_from(const json& j, const std::string& where) {
  allow_keys(j, where, {"n", "samples", "omega0", "omega1"});
  const int n = integer(need(j, where, "n"), where + ".n");
  if (n < 1) bad(where + ".n: must be positive");
  const int samples = j.contains("samples") ? integer(j["samples"], where + ".samples") : 2000;
  return RingDomain(domain_from(need(j, where, "omega0"), n, where + ".omega0"),
                    domain_from(need(j, where, "omega1"), n, where + ".omega1"), samples);
}

MetricForm metric_from(const json& j, const std::string& where) {
  try {
    return MetricForm::make(cmat(j, where));
  } catch (const Error& e) {
    if (e.status() == Status::format_error) throw;
    bad(where + ": " + e.what());
  }
}

json config_json(const SolveConfig& c) {
  return {{"eps", c.eps},           {"eps_schedule", c.eps_schedule}, {"resolution", c.resolution},
          {"damping", c.damping},   {"max_iters", c.max_iters},       {"residual_tol", c.residual_tol},
          {"psd_floor", c.psd_floor}};
}

SolveConfig config_from(const json& j, const std::string& where) {
  allow_keys(j, where, {"eps", "eps_schedule", "resolution", "damping", "max_iters", "residual_tol", "psd_floor"});
  SolveConfig c;
  if (j.contains("eps")) c.eps = num(j["eps"], where + ".eps");
  if (j.contains("eps_schedule")) c.eps_schedule = numbers(j["eps_schedule"], where + ".eps_schedule");
  if (j.contains("resolution")) c.resolution = integer(j["resolution"], where + ".resolution");
  if (j.contains("damping")) c.damping = num(j["damping"], where + ".damping");
  if (j.contains("max_iters")) c.max_iters = integer(j["max_iters"], where + ".max_iters");
  if (j.contains("residual_tol")) c.residual_tol = num(j["residual_tol"], where + ".residual_tol");
  if (j.contains("psd_floor")) c.psd_floor = num(j["psd_floor"], where + ".psd_floor");
  try {
    c.validate();
  } catch (const Error& e) {
    bad(where + ": " + e.what());
  }
  return c;
}

const char* rep_name(ScalarField::Rep r) {
  switch (r) {
    case ScalarField::Rep::analytic: return "analytic";
    case ScalarField::Rep::radial: return "radial";
    case ScalarField::Rep::reinhardt: return "reinhardt";
    case ScalarField::Rep::full: return "full";
  }
  return "?";
}

json witness_json(const Point& z) { return z.size() ? cvec_json(z) : json(nullptr); }

json named(const std::vector<std::pair<std::string, double>>& v) {
  json o = json::object();
  for (const auto& [k, x] : v) o[k] = real(x);
  return o;
}

json check_json(const CheckReport& r) {
  return {{"id", r.id},
          {"pass", r.pass},
          {"applicable", r.applicable},
          {"margin", real(r.margin)},
          {"tolerance", real(r.tolerance)},
          {"tolerances", named(r.tolerances)},
          {"parts", named(r.parts)},
          {"trend", real_list(r.trend)},
          {"witness", witness_json(r.witness)},
          {"samples", r.samples},
          {"note", r.note}};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Status::io_error, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Status::io_error, "cannot write " + path);
  out << text;
  if (!out) throw Error(Status::io_error, "write failed: " + path);
}

std::string ring_to_json(const RingDomain& ring) { return ring_json(ring).dump(2); }
RingDomain ring_from_json(const std::string& text) { return ring_from(parse(text, "domain"), "domain"); }

std::string metric_to_json(const MetricForm& G) { return cmat_json(G.G).dump(); }
MetricForm metric_from_json(const std::string& text) { return metric_from(parse(text, "metric"), "metric"); }

std::string config_to_json(const SolveConfig& cfg) { return config_json(cfg).dump(2); }
SolveConfig config_from_json(const std::string& text) { return config_from(parse(text, "solve"), "solve"); }

std::string field_to_json(const ScalarField& field) {
  json j = {{"format", "cmlab-field"},
            {"version", 1},
            {"rep", rep_name(field.rep())},
            {"eps", field.eps()},
            {"metric", cmat_json(field.metric().G)}};
  if (auto f = dynamic_cast<const RadialField*>(&field)) {
    j["n"] = f->n();
    j["r"] = f->r();
    j["R"] = f->R();
    j["values"] = f->values();
  } else if (auto f = dynamic_cast<const ReinhardtField*>(&field)) {
    const auto& g = f->grid();
    j["grid"] = {{"a0", g.a0()}, {"b0", g.b0()}, {"a1", g.a1()}, {"b1", g.b1()}, {"nt", g.nt()}, {"nq", g.nq()}};
    j["values"] = f->values();
  } else if (auto f = dynamic_cast<const FullField*>(&field)) {
    j["grid"] = {{"N", f->grid().N()}, {"margin", f->grid().margin()}};
    j["ring"] = ring_json(f->grid().ring());
    j["values"] = f->values();
  } else if (auto f = dynamic_cast<const AnalyticField*>(&field)) {
    const AnalyticSpec& s = f->spec();
    j["n"] = f->n();
    if (s.kind == "quadratic") {
      j["analytic"] = {{"kind", s.kind}, {"A", cmat_json(s.A)}, {"B", cmat_json(s.B)}, {"L", cvec_json(s.L)}, {"c", s.c}};
    } else if (s.kind == "log_hermitian") {
      j["analytic"] = {{"kind", s.kind}, {"H", cmat_json(s.H)}, {"a", s.a}, {"c", s.c}};
    } else {
      throw Error(Status::invalid_argument, "analytic field '" + s.kind + "' has no file representation");
    }
  } else {
    throw Error(Status::invalid_argument, "field type has no file representation");
  }
  if (field.ring() && !j.contains("ring")) j["ring"] = ring_json(*field.ring());
  return j.dump(1);
}

FieldPtr field_from_json(const std::string& text) {
  json j = parse(text, "field");
  const std::string w = "field";
  allow_keys(j, w, {"format", "version", "rep", "eps", "metric", "ring", "n", "r", "R", "values", "grid", "analytic"});
  if (need(j, w, "format") != "cmlab-field") bad(w + ".format: expected 'cmlab-field'");
  if (integer(need(j, w, "version"), w + ".version") != 1) bad(w + ".version: unsupported");
  const json& rj = need(j, w, "rep");
  if (!rj.is_string()) bad(w + ".rep: expected a string");
  const std::string rep = rj.get<std::string>();
  std::optional<RingDomain> ring;
  if (j.contains("ring")) ring.emplace(ring_from(j["ring"], w + ".ring"));

  FieldPtr out;
  try {
    if (rep == "radial") {
      out = std::make_shared<RadialField>(integer(need(j, w, "n"), w + ".n"), num(need(j, w, "r"), w + ".r"),
                                          num(need(j, w, "R"), w + ".R"), numbers(need(j, w, "values"), w + ".values"));
    } else if (rep == "reinhardt") {
      const json& g = need(j, w, "grid");
      const std::string gw = w + ".grid";
      allow_keys(g, gw, {"a0", "b0", "a1", "b1", "nt", "nq"});
      ReinhardtGrid grid(num(need(g, gw, "a0"), gw), num(need(g, gw, "b0"), gw), num(need(g, gw, "a1"), gw),
                         num(need(g, gw, "b1"), gw), integer(need(g, gw, "nt"), gw), integer(need(g, gw, "nq"), gw));
      auto vals = numbers(need(j, w, "values"), w + ".values");
      if (static_cast<int>(vals.size()) != grid.size()) bad(w + ".values: expected " + std::to_string(grid.size()));
      out = std::make_shared<ReinhardtField>(std::move(grid), std::move(vals));
    } else if (rep == "full") {
      if (!ring) bad(w + ": full fields need 'ring'");
      const json& g = need(j, w, "grid");
      const std::string gw = w + ".grid";
      allow_keys(g, gw, {"N", "margin"});
      auto grid = std::make_shared<FullGrid>(*ring, integer(need(g, gw, "N"), gw + ".N"),
                                             num(need(g, gw, "margin"), gw + ".margin"));
      auto vals = numbers(need(j, w, "values"), w + ".values");
      if (static_cast<int>(vals.size()) != grid->size()) bad(w + ".values: expected " + std::to_string(grid->size()));
      out = std::make_shared<FullField>(grid, std::move(vals));
    } else if (rep == "analytic") {
      const json& a = need(j, w, "analytic");
      const std::string aw = w + ".analytic";
      const std::string kind = need(a, aw, "kind").get<std::string>();
      if (kind == "quadratic") {
        allow_keys(a, aw, {"kind", "A", "B", "L", "c"});
        out = AnalyticField::quadratic(cmat(need(a, aw, "A"), aw + ".A"), cmat(need(a, aw, "B"), aw + ".B"),
                                       a.contains("L") ? cvec(a["L"], aw + ".L") : CVec(),
                                       a.contains("c") ? num(a["c"], aw + ".c") : 0.0);
      } else if (kind == "log_hermitian") {
        allow_keys(a, aw, {"kind", "H", "a", "c"});
        out = AnalyticField::log_hermitian(cmat(need(a, aw, "H"), aw + ".H"), num(need(a, aw, "a"), aw + ".a"),
                                           a.contains("c") ? num(a["c"], aw + ".c") : 0.0);
      } else {
        bad(aw + ".kind: unknown analytic kind '" + kind + "'");
      }
    } else {
      bad(w + ".rep: unknown representation '" + rep + "'");
    }
  } catch (const Error& e) {
    if (e.status() == Status::format_error) throw;
    bad(w + ": " + e.what());
  }
  if (j.contains("eps")) out->set_eps(num(j["eps"], w + ".eps"));
  if (j.contains("metric")) {
    MetricForm G = metric_from(j["metric"], w + ".metric");
    if (G.dim() != out->n()) bad(w + ".metric: dimension does not match the field");
    out->set_metric(G);
  }
  if (ring) {
    if (ring->n() != out->n()) bad(w + ".ring: dimension does not match the field");
    out->set_ring(*ring);
  }
  return out;
}

void write_field(const ScalarField& field, const std::string& path) { write_text(path, field_to_json(field)); }
FieldPtr read_field(const std::string& path) { return field_from_json(read_text(path)); }

std::string report_to_json(const SolveReport& rep) {
  json trace = json::array();
  for (const auto& s : rep.eps_trace)
    trace.push_back({{"eps", s.eps}, {"residual_inf", real(s.residual_inf)}, {"iterations", s.iterations},
                     {"increment", real(s.increment)}});
  double worst = 0.0;
  int eq = 0;
  for (double r : rep.node_residuals)
    if (!std::isnan(r)) ++eq, worst = std::max(worst, std::abs(r));
  json j = {{"eps", rep.eps},
            {"converged", rep.converged},
            {"residual_inf", real(rep.residual_inf)},
            {"psd_margin", real(rep.psd_margin)},
            {"iterations", rep.iterations},
            {"message", rep.message},
            {"eps_trace", trace},
            {"equation_nodes", eq},
            {"max_node_residual", real(worst)}};
  if (rep.field) j["rep"] = rep_name(rep.field->rep());
  return j.dump(2);
}

std::string check_to_json(const CheckReport& rep) { return check_json(rep).dump(2); }

std::string checks_to_json(const std::vector<CheckReport>& reps) {
  json a = json::array();
  for (const auto& r : reps) a.push_back(check_json(r));
  return a.dump(2);
}

std::string tangent_gauge_to_json(const TangentGauge& g, const Jet& j) {
  json o = {{"point", cvec_json(j.z)},       {"value", j.value},          {"grad_norm", g.grad_norm},
            {"A", cmat_json(g.A)},           {"B", cmat_json(g.B)},       {"convex", g.convex},
            {"W", g.W},                      {"V", g.V},                  {"frame", cmat_json(g.frame)},
            {"S", g.S ? real(*g.S) : json(nullptr)}, {"S_unreliable", g.S_unreliable}};
  if (g.kappa) {
    o["kappa"] = {{"K", cmat_json(g.kappa->K)},
                  {"eigenvalues", real_list(g.kappa->eigenvalues)},
                  {"max_eig", g.kappa->max_eig()},
                  {"sigma", g.kappa->sigma ? real(*g.kappa->sigma) : json(nullptr)}};
  } else {
    o["kappa"] = nullptr;
  }
  return o.dump(2);
}

ExperimentSpec experiment_from_json(const std::string& text, const std::string& base_dir) {
  json j = parse(text, "experiment");
  const std::string w = "experiment";
  allow_keys(j, w, {"domain", "metric", "solve", "tier", "full", "checks", "output", "seed"});
  ExperimentSpec s;
  const json& d = need(j, w, "domain");
  if (d.is_string()) {
    std::filesystem::path p(d.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::string body;
    try {
      body = read_text(p.string());
    } catch (const Error&) {
      bad(w + ".domain: cannot read " + p.string());
    }
    s.ring.emplace(ring_from(parse(body, "domain"), "domain"));
  } else {
    s.ring.emplace(ring_from(d, w + ".domain"));
  }
  s.G = j.contains("metric") ? metric_from(j["metric"], w + ".metric") : MetricForm::identity(s.ring->n());
  if (s.G.dim() != s.ring->n()) bad(w + ".metric: dimension does not match the domain");
  if (j.contains("solve")) s.solve = config_from(j["solve"], w + ".solve");
  if (j.contains("tier")) {
    const std::string t = j["tier"].is_string() ? j["tier"].get<std::string>() : "";
    if (t == "automatic") s.tier = Tier::automatic;
    else if (t == "radial") s.tier = Tier::radial;
    else if (t == "reinhardt") s.tier = Tier::reinhardt;
    else if (t == "full") s.tier = Tier::full;
    else bad(w + ".tier: expected automatic, radial, reinhardt or full");
  }
  if (j.contains("full")) {
    const json& f = j["full"];
    const std::string fw = w + ".full";
    allow_keys(f, fw, {"start", "relaxation", "margin", "subsolution_c"});
    if (f.contains("start")) {
      const std::string st = f["start"].is_string() ? f["start"].get<std::string>() : "";
      if (st == "harmonic") s.full.start = InitialGuess::harmonic;
      else if (st == "subsolution") s.full.start = InitialGuess::subsolution;
      else bad(fw + ".start: expected harmonic or subsolution");
    }
    if (f.contains("relaxation")) s.full.relaxation = num(f["relaxation"], fw + ".relaxation");
    if (f.contains("margin")) s.full.margin = num(f["margin"], fw + ".margin");
    if (f.contains("subsolution_c")) s.full.subsolution.c = num(f["subsolution_c"], fw + ".subsolution_c");
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) bad(w + ".checks: expected a list of names");
    auto known = check_names();
    for (const auto& c : j["checks"]) {
      if (!c.is_string()) bad(w + ".checks: expected a list of names");
      std::string nm = c.get<std::string>();
      if (std::find(known.begin(), known.end(), nm) == known.end()) bad(w + ".checks: unknown check '" + nm + "'");
      s.checks.push_back(nm);
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) bad(w + ".output: expected a path");
    s.output = j["output"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) bad(w + ".seed: expected an integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  return s;
}

}  // namespace cmlab
