// rankscope command line. Every subcommand prints one JSON report on stdout;
// tensors, families and sequences go to --out when given.

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rankscope/io.hpp"

#ifndef RANKSCOPE_VERSION
#define RANKSCOPE_VERSION "dev"
#endif

using namespace rankscope;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitDomain = 2;
constexpr int kExitUsage = 64;

const std::set<std::string> kCommands{"rho",          "hr-family", "ans-build",   "construct",  "sp-afr-check",
                                      "seq-stack",    "seq-extract", "afr-check", "canonicalize", "detect",
                                      "rank-2slice",  "cp-fit",    "typical-rank-mc"};

struct Args {
  bool no_timestamp = false;
  std::string input, out, mode = "auto", kase, format = "json";
  std::size_t n = 0, p = 0, m = 0, l = 0, order = 0, rank = 0;
  std::size_t samples = 1000, restarts = 32, attempts = 8, passes = 1, workers = 0;
  std::uint64_t seed = 0;
  double mesh = 0.01, tol = 1e-9, canon_tol = 1e-8, fit_tol = 1e-6;
  bool crosscheck = false;
};

json option_value(const CLI::Option* o) {
  if (o->get_items_expected_max() == 0) return o->count() > 0;
  const std::string s = o->count() > 0 ? o->as<std::string>() : o->get_default_str();
  if (s.empty()) return nullptr;
  try {
    std::size_t used = 0;
    const long long i = std::stoll(s, &used);
    if (used == s.size()) return i;
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

json config_of(const CLI::App* sub) {
  json c = json::object();
  for (const CLI::Option* o : sub->get_options()) {
    if (o->get_lnames().empty() || o->get_lnames()[0] == "help") continue;
    c[o->get_lnames()[0]] = option_value(o);
  }
  return c;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json provenance(const CLI::App* sub, const Args& a) {
  json p{{"tool", "rankscope"}, {"version", RANKSCOPE_VERSION}, {"command", sub->get_name()},
         {"config", config_of(sub)}, {"seed", a.seed}};
  if (!a.no_timestamp) p["timestamp"] = utc_now();
  return p;
}

/// Writes doc to --out and notes the path, or embeds it under key.
void emit_document(json& report, const Args& a, const std::string& key, const json& doc) {
  if (a.out.empty()) {
    report[key] = doc;
  } else {
    write_json_file(a.out, doc);
    report["out"] = a.out;
  }
}

AnyTensor load_tensor(const Args& a) { return tensor_from_json(read_json_file(a.input)); }

AfrOptions afr_options(const Args& a) {
  AfrOptions o;
  o.falsify.restarts = a.restarts;
  o.falsify.seed = a.seed;
  o.falsify.tol = a.tol;
  o.falsify.workers = a.workers;
  o.grid.mesh = a.mesh;
  return o;
}

CanonOptions canon_options(const Args& a) {
  return {.tolerance = a.canon_tol, .seed = a.seed, .attempts = a.attempts};
}

json run(const std::string& cmd, const Args& a) {
  json r = json::object();
  if (cmd == "rho") {
    r["n"] = a.n;
    r["rho"] = rho(a.n);
  } else if (cmd == "hr-family") {
    const HRFamily f = hr_family(a.order);
    r["order"] = f.order;
    r["members"] = f.members.size();
    r["valid"] = validate_hr(f);
    emit_document(r, a, "family", family_to_json(f));
  } else if (cmd == "ans-build") {
    emit_document(r, a, "tensor", tensor_to_json(ans_tensor(a.n, a.p)));
  } else if (cmd == "construct") {
    const auto c = parse_misc_case(a.kase);
    if (!c) fail(ErrorCode::Precondition, "unknown case " + a.kase + " (m3, m4, m6 or m10)");
    const auto inf = info(*c);
    r["case"] = inf.name;
    r["l"] = inf.l;
    emit_document(r, a, "tensor", tensor_to_json(build_misc(*c, a.n)));
  } else if (cmd == "sp-afr-check") {
    const SpAfrReport rep =
        std::visit([&](const auto& t) { return sp_afr_report(t, a.l, afr_options(a)); }, load_tensor(a));
    r["ok"] = rep.ok;
    r["bottom_zero"] = rep.bottom_zero;
    r["heuristic"] = rep.heuristic;
    if (rep.bottom_zero) r["verdict"] = verdict_to_json(rep.verdict);
  } else if (cmd == "seq-stack") {
    const CondSeq s = seq_from_json(read_json_file(a.input));
    emit_document(r, a, "tensor", tensor_to_json(seq_to_stacked(s)));
  } else if (cmd == "seq-extract") {
    const SeqOptions so{.afr = afr_options(a), .seed = a.seed, .attempts = a.attempts};
    const CondSeq s = std::visit([&](const auto& t) { return sp_afr_to_seq(t, a.l, so); }, load_tensor(a));
    emit_document(r, a, "sequence", seq_to_json(s));
  } else if (cmd == "afr-check") {
    const AfrOptions o = afr_options(a);
    const AfrVerdict v = std::visit(
        [&](const auto& t) -> AfrVerdict {
          if (a.mode == "exact") {
            if (t.m() < t.n()) return {AfrStatus::Falsified, 0.0, std::nullopt};
            return exact_certify(t) ? AfrVerdict{AfrStatus::CertifiedExact, 1.0, std::nullopt} : AfrVerdict{};
          }
          if (a.mode == "falsify") {
            if (auto w = falsify(t, o.falsify)) return {AfrStatus::Falsified, 0.0, std::move(w)};
            return {};
          }
          if (a.mode == "certify") return grid_certify(t, o.grid, o.falsify);
          return afr_check(t, o);
        },
        load_tensor(a));
    r.update(verdict_to_json(v));
  } else if (cmd == "canonicalize") {
    const RealTensor t = to_real(load_tensor(a));
    const CanonOptions o = canon_options(a);
    const CanonResult c = t.p() == 1   ? last_slice_normalize(t, o)
                          : t.p() == 2 ? pencil_canonicalize(t, o)
                                       : multi_canonicalize(t, o);
    r["residual"] = c.residual;
    r["condP"] = c.cond_p;
    r["condQ"] = c.cond_q;
    emit_document(r, a, "result", canon_to_json(c));
  } else if (cmd == "detect") {
    DetectorOptions o;
    o.canon = canon_options(a);
    o.afr.falsify.restarts = a.restarts;
    o.afr.falsify.seed = a.seed;
    o.afr.grid.mesh = a.mesh;
    o.passes = a.passes;
    o.seed = a.seed;
    r.update(detector_to_json(detector(to_real(load_tensor(a)), o)));
  } else if (cmd == "rank-2slice") {
    const auto k = rank_nn2(to_real(load_tensor(a)));
    r["status"] = k ? "Determined" : "Indeterminate";
    r["rank"] = k ? json(*k) : json(nullptr);
  } else if (cmd == "cp-fit") {
    const CpOptions o{.restarts = a.restarts, .seed = a.seed, .fit_tol = a.fit_tol};
    r.update(cp_to_json(rank_leq_oracle(to_real(load_tensor(a)), a.rank, o), a.rank));
  } else if (cmd == "typical-rank-mc") {
    McOptions o{.samples = a.samples, .seed = a.seed, .crosscheck = a.crosscheck, .workers = a.workers};
    o.detector = mc_detector_defaults();
    const McSummary s = mc_experiment(a.m, a.n, a.p, o);
    r["summary"] = summary_to_json(s, !a.no_timestamp);
    r["csv"] = summary_to_csv(s);
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankscope: AFR tensor constructions and typical-rank experiments", "rankscope"};
  app.set_version_flag("--version", std::string(RANKSCOPE_VERSION));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Args a;
  a.workers = default_workers();
  app.add_flag("--no-timestamp", a.no_timestamp, "Omit wall-clock fields from the report")->configurable();

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  auto input = [&](CLI::App* s) { s->add_option("--input", a.input, "Input JSON")->required(); };
  auto out = [&](CLI::App* s) { s->add_option("--out", a.out, "Write the document here instead of stdout"); };
  auto seed = [&](CLI::App* s) { s->add_option("--seed", a.seed, "Seed"); };
  auto afr_opts = [&](CLI::App* s) {
    s->add_option("--mesh", a.mesh, "Grid mesh");
    s->add_option("--restarts", a.restarts, "Falsifier restarts");
    s->add_option("--tol", a.tol, "Falsifier tolerance, relative to max |A_i|");
    s->add_option("--workers", a.workers, "Threads (RANKSCOPE_THREADS caps the default)");
  };

  CLI::App* c_rho = sub("rho", "Hurwitz-Radon number");
  c_rho->add_option("--n", a.n, "n")->required();

  CLI::App* c_hr = sub("hr-family", "Hurwitz-Radon family of the given order");
  c_hr->add_option("--order", a.order, "Order")->required();
  out(c_hr);

  CLI::App* c_ans = sub("ans-build", "n x n x p absolutely nonsingular tensor");
  c_ans->add_option("--n", a.n, "n")->required();
  c_ans->add_option("--p", a.p, "p")->required();
  out(c_ans);

  CLI::App* c_con = sub("construct", "Zero-bottom AFR tensor for one of the small cases");
  c_con->add_option("--case", a.kase, "m3, m4, m6 or m10")->required();
  c_con->add_option("--n", a.n, "n")->required();
  out(c_con);

  CLI::App* c_sp = sub("sp-afr-check", "AFR with zero bottom l rows on slices 3..m");
  input(c_sp);
  c_sp->add_option("--l", a.l, "l")->required();
  afr_opts(c_sp);
  seed(c_sp);

  CLI::App* c_stack = sub("seq-stack", "Sequence JSON to stacked tensor");
  input(c_stack);
  out(c_stack);

  CLI::App* c_ext = sub("seq-extract", "Zero-bottom AFR tensor to a sequence");
  input(c_ext);
  c_ext->add_option("--l", a.l, "l")->required();
  c_ext->add_option("--attempts", a.attempts, "Perturbation attempts");
  afr_opts(c_ext);
  out(c_ext);

  CLI::App* c_afr = sub("afr-check", "Absolutely full column rank check");
  input(c_afr);
  c_afr->add_option("--mode", a.mode, "exact, falsify, certify or auto")
      ->check(CLI::IsMember({"exact", "falsify", "certify", "auto"}));
  afr_opts(c_afr);
  seed(c_afr);

  CLI::App* c_can = sub("canonicalize", "Normal form of 1, 2 or more slices");
  input(c_can);
  out(c_can);
  c_can->add_option("--tol", a.canon_tol, "Residual tolerance");
  c_can->add_option("--attempts", a.attempts, "Random candidates per pencil");

  CLI::App* c_det = sub("detect", "Membership in the higher-rank open set");
  input(c_det);
  c_det->add_option("--passes", a.passes, "Canonicalization passes");
  c_det->add_option("--restarts", a.restarts, "Falsifier restarts");
  c_det->add_option("--mesh", a.mesh, "Grid mesh");
  c_det->add_option("--attempts", a.attempts, "Random candidates per pencil");

  CLI::App* c_r2 = sub("rank-2slice", "Real rank of an n x n x 2 tensor");
  input(c_r2);

  CLI::App* c_cp = sub("cp-fit", "Numerical rank <= r evidence");
  input(c_cp);
  c_cp->add_option("--rank", a.rank, "r")->required();
  c_cp->add_option("--restarts", a.restarts, "Restarts")->default_str("20");
  c_cp->add_option("--tol", a.fit_tol, "FitFound threshold on the relative residual");

  CLI::App* c_mc = sub("typical-rank-mc", "Monte Carlo over Gaussian n x p x m tensors");
  c_mc->add_option("--m", a.m, "m")->required();
  c_mc->add_option("--n", a.n, "n")->required();
  c_mc->add_option("--p", a.p, "p")->required();
  c_mc->add_option("--samples", a.samples, "Samples");
  c_mc->add_flag("--crosscheck", a.crosscheck, "Fit rank p to NotInU samples");
  c_mc->add_option("--workers", a.workers, "Threads (RANKSCOPE_THREADS caps the default)");
  c_mc->add_option("--format", a.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  out(c_mc);

  for (CLI::App* s : {c_cp, c_det, c_mc, c_ext, c_can}) seed(s);

  if (argc > 1 && argv[1][0] != '-' && !kCommands.count(argv[1])) {
    std::cerr << "unknown subcommand: " << argv[1] << "\n\n" << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == c_cp && c_cp->get_option("--restarts")->count() == 0) a.restarts = 20;
  const std::string cmd = chosen->get_name();
  try {
    json report = run(cmd, a);
    report["provenance"] = provenance(chosen, a);
    if (cmd == "typical-rank-mc" && a.format == "csv") {
      std::ostringstream os;
      os << "# " << report["provenance"].dump() << '\n' << report["csv"].get<std::string>();
      if (a.out.empty()) std::cout << os.str();
      else write_text_file(a.out, os.str());
      return 0;
    }
    report.erase("csv");
    if (cmd == "typical-rank-mc" && !a.out.empty()) write_json_file(a.out, report);
    std::cout << report.dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
    return e.code() == ErrorCode::Io ? kExitIo : kExitDomain;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "BadDocument"}, {"message", e.what()}}.dump() << '\n';
    return kExitDomain;
  }
}
