// Command-line front end. Links only the C API.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmlab/cmlab.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { ok = 0, solver_failure = 2, singular = 3, usage = 64, format = 65 };

struct Owned {
  char* p = nullptr;
  ~Owned() { cmlab_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using FieldHandle = std::unique_ptr<cmlab_field, decltype(&cmlab_field_free)>;

int report(int status, const std::string& what) {
  std::cerr << "cmlab " << what << ": " << cmlab_status_name(status) << ": " << cmlab_last_error() << "\n";
  return status;
}

bool geometric(int s) { return s == CMLAB_SINGULAR || s == CMLAB_NONCONVEX || s == CMLAB_NOT_POSITIVE_DEFINITE; }

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return static_cast<bool>(out);
}

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

FieldHandle open_field(const std::string& path, int& status) {
  cmlab_field* f = nullptr;
  status = cmlab_field_read(path.c_str(), &f);
  return FieldHandle(f, cmlab_field_free);
}

double num(const json& v) { return v.is_number() ? v.get<double>() : NAN; }

int field_exit(int status) { return status == CMLAB_IO_ERROR || status == CMLAB_FORMAT_ERROR ? format : usage; }

// ---------------------------------------------------------------------------

int cmd_lemmas(int trials, std::uint64_t seed, bool fault) {
  if (trials == 0) std::cerr << "warning: trials = 0, every suite passes vacuously\n";
  cmlab_set_takagi_fault(fault ? 1 : 0);
  int bad = 0;
  std::printf("%-28s %8s %9s %14s\n", "suite", "trials", "failures", "worst_margin");
  for (int k = 0; k < cmlab_lemma_suite_count(); ++k) {
    const char* name = cmlab_lemma_suite_name(k);
    Owned out;
    int s = cmlab_lemma_suite_run(name, trials, seed, &out.p);
    if (s != CMLAB_OK) return report(s, "lemmas"), usage;
    json r = json::parse(out.str());
    const int fails = r["failures"].get<int>();
    bad += fails > 0;
    std::printf("%-28s %8d %9d %14.6g  %s\n", name, r["trials"].get<int>(), fails, num(r["worst_margin"]),
                fails ? "FAIL" : "pass");
    if (fails) std::printf("    witness: %s\n", r["witness"].get<std::string>().c_str());
  }
  cmlab_set_takagi_fault(0);
  return bad ? 1 : ok;
}

int cmd_solve(const std::string& spec_path, const std::string& out_override) {
  std::string text;
  if (!read_file(spec_path, text)) {
    std::cerr << "cmlab solve: cannot read " << spec_path << "\n";
    return usage;
  }
  const std::string base = fs::path(spec_path).parent_path().string();
  Owned info;
  int s = cmlab_experiment_info(text.c_str(), base.c_str(), &info.p);
  if (s != CMLAB_OK) return report(s, "solve"), usage;
  json meta = json::parse(info.str());
  fs::path out = out_override.empty() ? fs::path(meta["output"].get<std::string>()) : fs::path(out_override);
  if (out.is_relative() && out_override.empty()) out = fs::path(base) / out;
  std::error_code ec;
  fs::create_directories(out, ec);

  cmlab_field* raw = nullptr;
  Owned rep;
  s = cmlab_solve(text.c_str(), base.c_str(), &raw, &rep.p);
  FieldHandle field(raw, cmlab_field_free);
  if (rep.p) write_file((out / "report.json").string(), rep.str() + "\n");
  if (field) cmlab_field_write(field.get(), (out / "field.json").string().c_str());
  if (s == CMLAB_SOLVER_FAILURE) return report(s, "solve"), solver_failure;
  if (s != CMLAB_OK) return report(s, "solve"), geometric(s) ? singular : usage;

  json r = json::parse(rep.str());
  std::printf("solved %s field, eps=%g: residual %.3e, psd margin %.3e, %d iterations\n",
              r["rep"].get<std::string>().c_str(), num(r["eps"]), num(r["residual_inf"]),
              num(r["psd_margin"]), r["iterations"].get<int>());
  std::printf("wrote %s and %s\n", (out / "field.json").string().c_str(), (out / "report.json").string().c_str());

  std::vector<std::string> checks = meta["checks"].get<std::vector<std::string>>();
  if (!checks.empty()) {
    std::string list;
    for (const auto& c : checks) list += (list.empty() ? "" : ",") + c;
    Owned vr;
    int failures = 0;
    s = cmlab_verify(field.get(), list.c_str(), meta["seed"].get<std::uint64_t>(), &vr.p, &failures);
    if (s != CMLAB_OK) return report(s, "solve"), usage;
    write_file((out / "checks.json").string(), vr.str() + "\n");
    std::printf("checks: %d of %zu failed (checks.json)\n", failures, checks.size());
  }
  return ok;
}

int cmd_verify(const std::string& path, const std::string& checks, const std::string& out, std::uint64_t seed) {
  int s;
  FieldHandle field = open_field(path, s);
  if (s != CMLAB_OK) return report(s, "verify"), format;
  Owned rep;
  int failures = 0;
  s = cmlab_verify(field.get(), checks.c_str(), seed, &rep.p, &failures);
  if (s == CMLAB_INVALID_ARGUMENT) return report(s, "verify"), usage;
  if (s != CMLAB_OK) return report(s, "verify"), format;
  if (!out.empty() && !write_file(out, rep.str() + "\n")) {
    std::cerr << "cmlab verify: cannot write " << out << "\n";
    return usage;
  }
  for (const auto& r : json::parse(rep.str())) {
    const double m = num(r["margin"]);
    std::printf("%-22s %s  margin %+.4e  tol %.2e  %s\n", r["id"].get<std::string>().c_str(),
                r["pass"].get<bool>() ? "pass" : "FAIL", m, num(r["tolerance"]),
                r["note"].get<std::string>().c_str());
  }
  return failures;
}

int cmd_leaf(const std::string& path, const std::string& point, double radius, int steps, const std::string& out) {
  int s;
  FieldHandle field = open_field(path, s);
  if (s != CMLAB_OK) return report(s, "leaf"), field_exit(s);
  int n = 0;
  cmlab_field_dim(field.get(), &n);
  if (n != 2) {
    std::cerr << "cmlab leaf: leaves are traced for n = 2 fields (got n = " << n << ")\n";
    return usage;
  }
  std::vector<double> z = parse_point(point);
  if (z.size() != 4) {
    std::cerr << "cmlab leaf: --point needs 4 real coordinates x1,y1,x2,y2\n";
    return usage;
  }
  Owned csv;
  double harm = 0, cr = 0;
  s = cmlab_leaf(field.get(), z.data(), radius, steps, &csv.p, &harm, &cr);
  if (s != CMLAB_OK) return report(s, "leaf"), geometric(s) ? singular : usage;
  if (out.empty()) std::cout << csv.str();
  else if (!write_file(out, csv.str())) return usage;
  std::fprintf(stderr, "harmonicity residual %.3e, Cauchy-Riemann residual %.3e\n", harm, cr);
  return ok;
}

int cmd_gauge(const std::string& path, const std::string& point, double eps) {
  int s;
  FieldHandle field = open_field(path, s);
  if (s != CMLAB_OK) return report(s, "gauge"), field_exit(s);
  int n = 0;
  cmlab_field_dim(field.get(), &n);
  std::vector<double> z = parse_point(point);
  if (static_cast<int>(z.size()) != 2 * n) {
    std::cerr << "cmlab gauge: --point needs " << 2 * n << " real coordinates\n";
    return usage;
  }
  Owned g;
  s = cmlab_gauge(field.get(), z.data(), eps, &g.p);
  if (s != CMLAB_OK) return report(s, "gauge"), geometric(s) ? singular : usage;
  std::cout << g.str() << "\n";
  return ok;
}

int cmd_subsolution(const std::string& ring_path, const std::string& metric_path, double c, std::uint64_t seed) {
  std::string ring, metric;
  if (!read_file(ring_path, ring)) return std::cerr << "cmlab subsolution: cannot read " << ring_path << "\n", usage;
  if (!metric_path.empty() && !read_file(metric_path, metric))
    return std::cerr << "cmlab subsolution: cannot read " << metric_path << "\n", usage;
  Owned r;
  int s = cmlab_subsolution(ring.c_str(), metric_path.empty() ? nullptr : metric.c_str(), c, seed, &r.p);
  if (s != CMLAB_OK) return report(s, "subsolution"), geometric(s) ? singular : usage;
  std::cout << r.str() << "\n";
  return json::parse(r.str())["ordering"]["ok"].get<bool>() ? ok : singular;
}

int cmd_deform(const std::string& ring_path, double t, double r, double R, const std::string& out) {
  std::string ring;
  if (!read_file(ring_path, ring)) return std::cerr << "cmlab deform: cannot read " << ring_path << "\n", usage;
  Owned res;
  int s = cmlab_deform(ring.c_str(), t, r, R, &res.p);
  if (s != CMLAB_OK) return report(s, "deform"), usage;
  if (out.empty()) std::cout << res.str() << "\n";
  else if (!write_file(out, res.str() + "\n")) return usage;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the perturbed complex Monge-Ampere Dirichlet problem on C-convex rings"};
  app.require_subcommand(1);
  int code = ok;

  auto* lem = app.add_subcommand("lemmas", "Run the quadratic-gauge property suites");
  int trials = 100;
  std::uint64_t seed = 12345;
  bool fault = false;
  lem->add_option("--trials", trials, "Random instances per suite")->check(CLI::NonNegativeNumber);
  lem->add_option("--seed", seed, "Random seed");
  lem->add_flag("--takagi-fault", fault, "Test hook: inject a faulty Takagi factorization");
  lem->callback([&] { code = cmd_lemmas(trials, seed, fault); });

  auto* sol = app.add_subcommand("solve", "Solve an experiment spec; writes field.json and report.json");
  std::string spec, out;
  sol->add_option("spec", spec, "Experiment spec (JSON)")->required();
  sol->add_option("--out", out, "Output directory (overrides the spec)");
  sol->callback([&] { code = cmd_solve(spec, out); });

  auto* ver = app.add_subcommand("verify", "Run verification checks on a field file; exit code = failures");
  std::string field_path, checks = "all";
  std::uint64_t vseed = 99;
  std::string vout;
  ver->add_option("field", field_path, "Field file (JSON)")->required();
  ver->add_option("--checks", checks, std::string("Comma-separated checks or 'all': ") + cmlab_check_names());
  ver->add_option("--out", vout, "Report file (JSON)");
  ver->add_option("--seed", vseed, "Sampling seed");
  ver->callback([&] { code = cmd_verify(field_path, checks, vout, vseed); });

  auto* leaf = app.add_subcommand("leaf", "Trace a leaf of the foliation; CSV on stdout or --out");
  std::string lfield, point, lout;
  double radius = 0.3;
  int steps = 10;
  leaf->add_option("field", lfield, "Field file (JSON)")->required();
  leaf->add_option("--point", point, "Base point x1,y1,x2,y2")->required();
  leaf->add_option("--radius", radius, "Leaf disc radius")->check(CLI::PositiveNumber);
  leaf->add_option("--steps", steps, "RK4 steps per ray")->check(CLI::PositiveNumber);
  leaf->add_option("--out", lout, "CSV file");
  leaf->callback([&] { code = cmd_leaf(lfield, point, radius, steps, lout); });

  auto* gau = app.add_subcommand("gauge", "Dump the tangent gauge at a point as JSON");
  std::string gfield, gpoint;
  double geps = -1.0;
  gau->add_option("field", gfield, "Field file (JSON)")->required();
  gau->add_option("--point", gpoint, "Point x1,y1,x2,y2,...")->required();
  gau->add_option("--eps", geps, "eps for the S gauge (default: the field's)");
  gau->callback([&] { code = cmd_gauge(gfield, gpoint, geps); });

  auto* sub = app.add_subcommand("subsolution", "Build the subsolution on a ring and report its properties");
  std::string sring, smetric;
  double c = 0.05;
  std::uint64_t sseed = 7;
  sub->add_option("ring", sring, "Domain spec (JSON)")->required();
  sub->add_option("--metric", smetric, "Metric file (JSON matrix)");
  sub->add_option("--c", c, "Green-type coefficient")->check(CLI::PositiveNumber);
  sub->add_option("--seed", sseed, "Sampling seed");
  sub->callback([&] { code = cmd_subsolution(sring, smetric, c, sseed); });

  auto* def = app.add_subcommand("deform", "Member t of the deformation family from concentric balls to a ring");
  std::string dring, dout;
  double t = 0.5, r = 0.0, R = 0.0;
  def->add_option("ring", dring, "Domain spec (JSON)")->required();
  def->add_option("--t", t, "Family parameter in [0, 1]")->required();
  def->add_option("--r", r, "Inner target radius");
  def->add_option("--R", R, "Outer target radius");
  def->add_option("--out", dout, "Output domain spec");
  def->callback([&] { code = cmd_deform(dring, t, r, R, dout); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }
  return code;
}
