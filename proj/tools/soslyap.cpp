#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "soslyap/cert/verify.hpp"
#include "soslyap/cli/corpus.hpp"
#include "soslyap/lyap/power.hpp"
#include "soslyap/lyap/search.hpp"
#include "soslyap/lyap/sos_check.hpp"
#include "soslyap/sos/savings.hpp"
#include "soslyap/sos/sdpa.hpp"

using namespace soslyap;

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kUsage = 2;
constexpr int kIndeterminate = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string upper(SdpStatus s) {
  std::string t = to_string(s);
  for (auto& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return t;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

std::string monomial_text(const Monomial& m) {
  std::string s;
  for (std::size_t i = 0; i < m.n_vars(); ++i) {
    if (m[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += 'x' + std::to_string(i + 1);
    if (m[i] > 1) s += '^' + std::to_string(m[i]);
  }
  return s.empty() ? "1" : s;
}

void print_gram(const GramCertificate& g) {
  std::cout << "gram " << g.label << " (" << g.basis.size() << "x" << g.basis.size()
            << ", min eigenvalue " << fmt(g.min_eigenvalue) << ")\n  basis:";
  for (const auto& m : g.basis) std::cout << " " << monomial_text(m);
  std::cout << "\n";
  for (Eigen::Index r = 0; r < g.gram.rows(); ++r) {
    std::cout << "  [";
    for (Eigen::Index c = 0; c < g.gram.cols(); ++c) std::cout << (c ? " " : "") << std::setw(11) << fmt(g.gram(r, c));
    std::cout << "]\n";
  }
}

/// --field components (one per state variable) or a --system JSON file.
struct SystemInput {
  std::vector<std::string> field;
  std::vector<std::string> matrices;
  std::string system_file;
  std::string time = "ct";

  void add_field_options(CLI::App* app) {
    app->add_option("--field", field, "vector field component (repeat once per state variable)");
    app->add_option("--system", system_file, "system description JSON");
  }

  void add_matrix_options(CLI::App* app) {
    app->add_option("--matrix", matrices, "mode matrix as rows 'a,b;c,d' (repeat per mode)");
    app->add_option("--system", system_file, "system description JSON");
    app->add_option("--time", time, "ct or dt")->check(CLI::IsMember({"ct", "dt"}));
  }

  Dynamics build() const {
    if (!system_file.empty()) return nlohmann::json::parse(read_file(system_file)).get<Dynamics>();
    if (!field.empty()) {
      std::vector<Polynomial> comps;
      for (const auto& c : field) comps.push_back(parse_polynomial(c, field.size()));
      return Dynamics::continuous(VectorField(std::move(comps)));
    }
    if (!matrices.empty()) {
      std::vector<LinearSystem> systems;
      for (const auto& m : matrices) systems.emplace_back(parse_matrix(m));
      return time_model_from_string(time) == TimeModel::Continuous ? Dynamics::continuous(systems)
                                                                    : Dynamics::discrete(systems);
    }
    throw UsageError("no system given (use --field, --matrix or --system)");
  }

  static Eigen::MatrixXd parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream rs(text);
    std::string row;
    while (std::getline(rs, row, ';')) {
      std::vector<double> r;
      std::stringstream cs(row);
      std::string cell;
      while (std::getline(cs, cell, ',')) {
        try {
          r.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw UsageError("bad matrix entry '" + cell + "'");
        }
      }
      rows.push_back(std::move(r));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
        throw UsageError("matrix '" + text + "' is not square");
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return a;
  }
};

struct SweepArgs {
  int degree_min = 2;
  int degree_max = 8;
  std::string mode = "v-sos";
  std::string solver = "embedded";
  std::string out_dir = ".";
  double eps = 1e-4;
  bool all_degrees = false;
  bool decrease_only = false;
  bool full_template = false;
  std::string json;

  void add(CLI::App* app, bool with_mode) {
    app->add_option("--degree-min", degree_min, "smallest even degree")->capture_default_str();
    app->add_option("--degree-max", degree_max, "largest even degree")->capture_default_str();
    if (with_mode) app->add_option("--mode", mode, "v-sos or thc-sos")->check(CLI::IsMember({"v-sos", "thc-sos"}));
    app->add_option("--solver", solver, "embedded or export-only")->check(CLI::IsMember({"embedded", "export-only"}));
    app->add_option("--out-dir", out_dir, "directory for export-only SDPA files");
    app->add_option("--eps", eps, "EpsilonPD scale")->capture_default_str();
    app->add_flag("--all-degrees", all_degrees, "keep sweeping after the first feasible degree");
    app->add_flag("--decrease-only", decrease_only, "impose only the decrease conditions");
    app->add_flag("--full-template", full_template, "non-homogeneous template even for homogeneous systems");
    app->add_option("--json", json, "write results as JSON");
  }
};

int run_sweep(const Dynamics& sys, const SweepArgs& a) {
  LyapunovOptions opt;
  opt.eps = a.eps;
  opt.decrease_only = a.decrease_only;
  if (a.full_template) opt.homogeneous_template = false;
  const SearchMode mode = search_mode_from_string(a.mode);
  if (a.degree_min < 2 || a.degree_min % 2 || a.degree_max < a.degree_min)
    throw UsageError("degrees must be even with 2 <= --degree-min <= --degree-max");

  if (a.solver == "export-only") {
    std::filesystem::create_directories(a.out_dir);
    for (int d = a.degree_min; d <= a.degree_max; d += 2) {
      const auto compiled = lyapunov_program(sys, d, mode, opt).compile_program();
      const auto path = std::filesystem::path(a.out_dir) / ("lyapunov-d" + std::to_string(d) + ".dat-s");
      std::ofstream(path) << export_sdpa(compiled.problem);
      std::cout << "wrote " << path.string() << " (" << compiled.problem.constraints.size() << " equalities)\n";
    }
    return kOk;
  }

  nlohmann::json out = nlohmann::json::array();
  bool indeterminate = false;
  std::cout << std::left << std::setw(8) << "degree" << std::setw(9) << "mode" << std::setw(15) << "status"
            << std::setw(14) << "margin" << std::setw(12) << "blocks" << "seconds\n";
  for (int d = a.degree_min; d <= a.degree_max; d += 2) {
    const auto r = synthesize_lyapunov(sys, d, mode, opt);
    std::string blocks;
    for (auto b : r.block_sizes) blocks += (blocks.empty() ? "" : ",") + std::to_string(b);
    std::cout << std::left << std::setw(8) << d << std::setw(9) << a.mode << std::setw(15) << upper(r.status)
              << std::setw(14) << fmt(r.margin) << std::setw(12) << blocks << fmt(r.seconds) << "\n";
    nlohmann::json row = {{"degree", d},       {"mode", a.mode},          {"status", to_string(r.status)},
                          {"margin", r.margin}, {"block_sizes", r.block_sizes}, {"note", r.note}};
    if (r.status == SdpStatus::Indeterminate) indeterminate = true;
    if (r.certificate) {
      const auto rep = verify_certificate(*r.certificate);
      std::cout << "  V = " << to_string(r.certificate->v) << "\n  verification: " << to_string(rep.verdict) << "\n";
      for (const auto& g : r.certificate->grams)
        std::cout << "  gram " << g.label << ": size " << g.basis.size() << ", min eigenvalue " << fmt(g.min_eigenvalue)
                  << "\n";
      row["certificate"] = *r.certificate;
      row["verification"] = rep;
    }
    out.push_back(std::move(row));
    if (r.feasible() && !a.all_degrees) break;
  }
  write_json(a.json, out);
  return indeterminate ? kIndeterminate : kOk;
}

int print_power(const PowerSearch& s, const std::string& json) {
  std::cout << std::left << std::setw(5) << "k" << std::setw(15) << "status" << std::setw(14) << "margin"
            << "gram size\n";
  for (const auto& st : s.steps)
    std::cout << std::left << std::setw(5) << st.k << std::setw(15) << upper(st.status) << std::setw(14)
              << fmt(st.margin) << st.gram_size << (st.note.empty() ? "" : "  " + st.note) << "\n";
  nlohmann::json j = {{"steps", nlohmann::json::array()}, {"note", s.note}};
  for (const auto& st : s.steps)
    j["steps"].push_back({{"k", st.k}, {"status", to_string(st.status)}, {"margin", st.margin}, {"gram_size", st.gram_size}});
  if (!s.certificate) {
    std::cout << s.note << "\n";
    write_json(json, j);
    return kIndeterminate;
  }
  const auto rep = verify_certificate(*s.certificate);
  std::cout << "k = " << s.certificate->k << "\nW = (" << to_string(s.certificate->base) << ")^"
            << 2 * s.certificate->k + 2 << "\nverification: " << to_string(rep.verdict) << "\n";
  for (const auto& id : rep.identities)
    std::cout << "  " << id.name << ": " << (id.holds ? "holds" : "FAILS") << " (relative error " << fmt(id.relative_error)
              << ")\n";
  j["certificate"] = *s.certificate;
  j["verification"] = rep;
  write_json(json, j);
  return rep.verified() ? kOk : kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soslyap: sum-of-squares Lyapunov certificates"};
  app.require_subcommand(1);
  int code = kOk;

  // check-sos
  std::string poly_text, json_path;
  bool homogeneous = false;
  double eps = 0.0;
  auto* check = app.add_subcommand("check-sos", "test whether a polynomial is a sum of squares");
  check->add_option("polynomial", poly_text, "polynomial text, e.g. \"x1^2 + 2*x1*x2 + x2^2\"")->required();
  check->add_flag("--homogeneous", homogeneous, "use a homogeneous Gram basis");
  check->add_option("--eps", eps, "require p - eps*|x|^(2 lo) sos (strict positivity)");
  check->add_option("--json", json_path, "write the result as JSON");
  check->callback([&] {
    const Polynomial p = parse_polynomial(poly_text);
    const auto start = std::chrono::steady_clock::now();
    const auto r = check_sos(p, homogeneous, {}, eps);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << upper(r.status) << " margin=" << fmt(r.margin) << " gram_size=" << r.gram_size
              << " seconds=" << fmt(secs) << "\n";
    if (!r.note.empty()) std::cout << "note: " << r.note << "\n";
    nlohmann::json j = {{"polynomial", to_string(p)},
                        {"status", to_string(r.status)},
                        {"margin", std::isfinite(r.margin) ? nlohmann::json(r.margin) : nlohmann::json(nullptr)},
                        {"note", r.note}};
    if (r.certificate) {
      print_gram(*r.certificate);
      j["certificate"] = *r.certificate;
    }
    write_json(json_path, j);
    code = r.status == SdpStatus::Indeterminate ? kIndeterminate : kOk;
  });

  // find-lyapunov
  SystemInput fl_sys;
  SweepArgs fl_args;
  auto* fl = app.add_subcommand("find-lyapunov", "degree sweep for a polynomial Lyapunov function");
  fl_sys.add_field_options(fl);
  fl_args.add(fl, true);
  fl->callback([&] { code = run_sweep(fl_sys.build(), fl_args); });

  // common-lyapunov
  SystemInput cl_sys;
  SweepArgs cl_args;
  auto* cl = app.add_subcommand("common-lyapunov", "common Lyapunov function for a switched linear system");
  cl_sys.add_matrix_options(cl);
  cl_args.add(cl, false);
  cl_args.degree_max = 4;
  cl->callback([&] { code = run_sweep(cl_sys.build(), cl_args); });

  // power-cert / planar-power-cert
  SystemInput pw_sys;
  std::string pw_v, pw_json;
  PowerOptions pw_opt;
  auto* pw = app.add_subcommand("power-cert", "W = V^(2k+2) certificate for a homogeneous system");
  pw->add_option("--v", pw_v, "Lyapunov function V")->required();
  pw_sys.add_field_options(pw);
  pw->add_option("--k-max", pw_opt.k_max, "largest k tried")->capture_default_str();
  pw->add_option("--json", pw_json, "write the certificate as JSON");
  pw->callback([&] {
    const Dynamics sys = pw_sys.build();
    code = print_power(power_certificate(parse_polynomial(pw_v, sys.n_vars()), sys.fields.at(0), pw_opt), pw_json);
  });

  SystemInput pp_sys;
  std::string pp_v, pp_json;
  PowerOptions pp_opt;
  auto* pp = app.add_subcommand("planar-power-cert", "W = (V+1)^(2k+2) certificate for a planar system");
  pp->add_option("--v", pp_v, "Lyapunov function V")->required();
  pp_sys.add_field_options(pp);
  pp->add_option("--k-max", pp_opt.k_max, "largest k tried")->capture_default_str();
  pp->add_option("--json", pp_json, "write the certificate as JSON");
  pp->callback([&] {
    const Dynamics sys = pp_sys.build();
    code = print_power(planar_power_certificate(parse_polynomial(pp_v, sys.n_vars()), sys.fields.at(0), pp_opt),
                       pp_json);
  });

  // savings
  std::int64_t sv_n = 2, sv_d = 4;
  auto* sv = app.add_subcommand("savings", "Gram variables and equalities saved by t.h.c.(V) sos over V sos");
  sv->add_option("--n", sv_n, "number of variables")->required();
  sv->add_option("--d", sv_d, "half degree (V has degree 2d)")->required();
  sv->callback([&] {
    const auto s = count_savings(sv_n, sv_d);
    std::cout << "vars_saved=" << s.vars_saved << " eqs_saved=" << s.eqs_saved << "\n";
  });

  // export-sdpa
  std::string ex_poly, ex_out, ex_mode = "v-sos";
  bool ex_homog = false;
  int ex_degree = 0;
  double ex_eps = 1e-4;
  SystemInput ex_sys;
  auto* ex = app.add_subcommand("export-sdpa", "write the SDP of an sos test or a Lyapunov search in SDPA format");
  ex->add_option("--poly", ex_poly, "polynomial for an sos test");
  ex->add_flag("--homogeneous", ex_homog, "homogeneous Gram basis for --poly");
  ex_sys.add_field_options(ex);
  ex->add_option("--degree", ex_degree, "Lyapunov degree for a system");
  ex->add_option("--mode", ex_mode, "v-sos or thc-sos")->check(CLI::IsMember({"v-sos", "thc-sos"}));
  ex->add_option("--eps", ex_eps, "EpsilonPD scale")->capture_default_str();
  ex->add_option("--out", ex_out, "output file (default: standard output)");
  ex->callback([&] {
    SdpProblem problem;
    if (!ex_poly.empty()) {
      const Polynomial p = parse_polynomial(ex_poly);
      problem = compile({make_sos_constraint("p", AffinePolynomial(p), ex_homog)}, {}, {}).problem;
    } else {
      if (ex_degree == 0) throw UsageError("export-sdpa needs --poly or a system with --degree");
      LyapunovOptions opt;
      opt.eps = ex_eps;
      problem = lyapunov_program(ex_sys.build(), ex_degree, search_mode_from_string(ex_mode), opt).compile_program().problem;
    }
    const std::string text = export_sdpa(problem);
    if (ex_out.empty())
      std::cout << text;
    else
      std::ofstream(ex_out) << text;
  });

  // verify
  std::string vf_file, vf_json;
  auto* vf = app.add_subcommand("verify", "re-verify a certificate JSON without the solver");
  vf->add_option("certificate", vf_file, "certificate JSON (as written by --json)")->required();
  vf->add_option("--json", vf_json, "write the verification report as JSON");
  vf->callback([&] {
    nlohmann::json j = nlohmann::json::parse(read_file(vf_file));
    if (j.is_array()) {
      nlohmann::json found;
      for (const auto& row : j)
        if (row.contains("certificate")) found = row;
      if (found.is_null()) throw UsageError("'" + vf_file + "' contains no certificate");
      j = found;
    }
    if (j.contains("certificate")) j = j.at("certificate");
    const std::string kind = j.value("kind", std::string("lyapunov"));
    const VerificationReport rep = kind == "power" ? verify_certificate(j.get<PowerCertificate>())
                                                   : verify_certificate(j.get<LyapunovCertificate>());
    std::cout << to_string(rep.verdict) << "\n";
    for (const auto& c : rep.constraints)
      std::cout << "  " << c.label << ": reconstruction error " << fmt(c.reconstruction_error) << ", min eigenvalue "
                << fmt(c.min_eigenvalue) << "\n";
    for (const auto& i : rep.identities) std::cout << "  " << i.name << ": " << (i.holds ? "holds" : "FAILS") << "\n";
    for (const auto& s : rep.samples)
      std::cout << "  min " << s.name << " over " << s.count << " samples: " << fmt(s.min_value) << "\n";
    for (const auto& r : rep.reasons) std::cout << "  rejected: " << r << "\n";
    write_json(vf_json, rep);
    code = rep.verified() ? kOk : kMismatch;
  });

  // solve-sdp
  std::string sd_file, sd_json;
  auto* sd = app.add_subcommand("solve-sdp", "solve an SdpProblem given as JSON or SDPA text");
  sd->add_option("problem", sd_file, "problem file (.json or .dat-s)")->required();
  sd->add_option("--json", sd_json, "write the solution as JSON");
  sd->callback([&] {
    const std::string text = read_file(sd_file);
    const SdpProblem p = sd_file.ends_with(".json") ? nlohmann::json::parse(text).get<SdpProblem>() : parse_sdpa(text);
    const SdpSolution s = solve(p);
    std::cout << upper(s.status) << " margin=" << fmt(s.margin) << " max_eq_violation=" << fmt(s.residuals.max_eq_violation)
              << " min_eigenvalue=" << fmt(s.residuals.min_eigenvalue) << " iterations=" << s.iterations << "\n";
    if (!s.note.empty()) std::cout << "note: " << s.note << "\n";
    write_json(sd_json, s);
    code = s.status == SdpStatus::Indeterminate ? kIndeterminate : kOk;
  });

  // corpus
  auto* corpus = app.add_subcommand("corpus", "built-in example systems with expected verdicts");
  corpus->require_subcommand(1);
  corpus->add_subcommand("list", "list corpus entries")->callback([&] {
    for (const auto& e : builtin_corpus())
      std::cout << std::left << std::setw(28) << e.name << std::setw(14) << to_string(e.kind) << e.description << "\n";
  });
  std::string cr_filter, cr_json;
  unsigned cr_jobs = 1;
  CorpusOptions cr_opt;
  auto* run = corpus->add_subcommand("run", "run corpus entries and compare with the expected verdicts");
  run->add_option("--filter", cr_filter, "only entries whose name contains this text");
  run->add_option("--jobs", cr_jobs, "entries solved concurrently")->capture_default_str();
  run->add_option("--k-max", cr_opt.power.k_max, "largest k for power certificates")->capture_default_str();
  run->add_option("--eps", cr_opt.lyapunov.eps, "EpsilonPD scale")->capture_default_str();
  run->add_option("--json", cr_json, "write results as JSON");
  run->callback([&] {
    std::vector<CorpusEntry> entries;
    for (auto& e : builtin_corpus())
      if (e.name.find(cr_filter) != std::string::npos) entries.push_back(std::move(e));
    if (entries.empty()) throw UsageError("no corpus entry matches '" + cr_filter + "'");
    const auto results = run_corpus(entries, cr_jobs, cr_opt);
    nlohmann::json j = nlohmann::json::array();
    bool all_ok = true, indeterminate = false;
    for (const auto& r : results) {
      std::cout << r.name << ": " << (r.ok() ? "ok" : "MISMATCH") << "\n";
      for (const auto& row : r.rows) {
        std::cout << "  " << std::left << std::setw(34) << row.label << std::setw(15) << upper(row.actual) << "expected "
                  << std::setw(13) << upper(row.expected) << "(" << to_string(row.origin) << ")"
                  << (row.matches() ? "" : "  <-- mismatch") << (row.detail.empty() ? "" : "  " + row.detail) << "\n";
        if (row.actual == SdpStatus::Indeterminate) indeterminate = true;
      }
      for (const auto& c : r.certificates)
        std::cout << "  certificate " << c.label << ": " << (c.verified ? "verified" : "REJECTED") << "\n";
      if (!r.error.empty()) std::cout << "  error: " << r.error << "\n";
      all_ok = all_ok && r.ok();
      j.push_back(r);
    }
    write_json(cr_json, j);
    code = all_ok ? kOk : (indeterminate ? kIndeterminate : kMismatch);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int c = app.exit(e);
    return c == 0 ? kOk : kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: parse error at " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad JSON input: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return code;
}
