#include "lab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "lab/config.hpp"
#include "lab/seminorms.hpp"
#include "lab/verify.hpp"

namespace lab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
  std::string config;
  uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = ".";
  uint64_t budget_ms = 60000;
};

struct Ctx {
  GlobalOpts g;
  RunManifest manifest;
  std::chrono::steady_clock::time_point t0;

  ExperimentConfig cfg() const {
    if (g.config.empty()) throw ValidationError("--config is required for this subcommand");
    ExperimentConfig c = parse_config(g.config);
    return c;
  }
  void write_artifact(const std::string& name, const std::string& content) const {
    fs::create_directories(g.out_dir);
    std::ofstream out(fs::path(g.out_dir) / name, std::ios::binary);
    out << content;
  }
  void emit_summary(json j) {
    auto t1 = std::chrono::steady_clock::now();
    manifest.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    j["manifest_digest"] = manifest.core_digest();
    std::cout << j.dump() << "\n";
    write_artifact("lab_manifest.json", manifest.to_json_string());
  }
  json artifact_header() const {
    json j;
    j["manifest_digest"] = manifest.core_digest();
    j["seed"] = g.seed;
    return j;
  }
};

json identity_report_json(const IdentityReport& rep) {
  json j;
  json recs = json::array();
  for (const auto& r : rep.records) {
    recs.push_back({{"N", r.N},
                    {"avg_a", {r.avg_a.real(), r.avg_a.imag()}},
                    {"avg_id", {r.avg_id.real(), r.avg_id.imag()}},
                    {"abs_diff", r.abs_diff}});
  }
  j["records"] = recs;
  j["trend"] = rep.trend;
  j["final_diff"] = rep.final_diff;
  return j;
}

std::string identity_report_csv(const IdentityReport& rep) {
  std::ostringstream out;
  out << "N,abs_diff\n";
  for (const auto& r : rep.records) out << r.N << "," << r.abs_diff << "\n";
  return out.str();
}

std::array<long long, 2> parse_vec2(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError("expected 'a,b' vector: " + text);
  return {std::stoll(text.substr(0, comma)), std::stoll(text.substr(comma + 1))};
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"numerical laboratory for sparse-corner ergodic averages"};
  app.require_subcommand(1);
  Ctx ctx;
  ctx.t0 = std::chrono::steady_clock::now();
  {
    std::string cmdline = "lab";
    for (const auto& a : args) cmdline += " " + a;
    ctx.manifest.command_line = cmdline;
  }

  app.add_option("--config", ctx.g.config, "experiment config file");
  app.add_option("--seed", ctx.g.seed, "deterministic master seed");
  app.add_option("--workers", ctx.g.workers, "worker pool size");
  app.add_option("--out-dir", ctx.g.out_dir, "artifact directory");
  app.add_option("--budget-ms", ctx.g.budget_ms, "cost budget in milliseconds");

  // ------------------------------------------------------------------ seq
  auto* seq = app.add_subcommand("seq", "sequence utilities");
  seq->require_subcommand(1);
  struct {
    std::string seq_spec, p;
    uint64_t n = 1, N = 100;
    int k = 1;
    long long q = 2, prime_bound = 100;
    int lift_bound = 6;
    std::string hardy;
  } sq;
  auto* seval = seq->add_subcommand("eval", "evaluate a(n)");
  seval->add_option("--seq", sq.seq_spec)->required();
  seval->add_option("--n", sq.n)->required();
  auto* snk = seq->add_subcommand("nk", "least n_k with k! | p(n_k)");
  snk->add_option("--p", sq.p)->required();
  snk->add_option("--k", sq.k)->required();
  auto* sint = seq->add_subcommand("intersective", "bounded intersectivity verification");
  sint->add_option("--p", sq.p)->required();
  sint->add_option("--prime-bound", sq.prime_bound);
  sint->add_option("--lift-bound", sq.lift_bound);
  auto* sres = seq->add_subcommand("residues", "residue histogram of a(n) mod q");
  sres->add_option("--seq", sq.seq_spec)->required();
  sres->add_option("--q", sq.q)->required();
  sres->add_option("--N", sq.N)->required();
  auto* scls = seq->add_subcommand("classify", "log-away classifier for a Hardy expression");
  scls->add_option("--hardy", sq.hardy)->required();

  // ------------------------------------------------------- seminorm family
  struct {
    std::string f = "f", words;
    bool check_duality = false, check_property = false;
  } sm;
  auto* seminorm = app.add_subcommand("seminorm", "box seminorm of an observable");
  seminorm->add_option("--f", sm.f, "observable key in [observables]");
  seminorm->add_option("--words", sm.words)->required();
  auto* dual = app.add_subcommand("dual", "dual function and the dual identity");
  dual->add_option("--f", sm.f);
  dual->add_option("--words", sm.words)->required();
  auto* cube = app.add_subcommand("cube", "cubic measure");
  cube->add_option("--words", sm.words)->required();
  cube->add_flag("--check-duality", sm.check_duality);
  auto* magic = app.add_subcommand("magic", "magic extension");
  magic->add_option("--words", sm.words)->required();
  magic->add_flag("--check-property", sm.check_property);

  // ------------------------------------------------------- finitary family
  struct {
    std::string input, dirs;
    uint64_t mc = 0;
    double eps = 0.1;
    bool u2 = false;
  } fin;
  auto* gnorm = app.add_subcommand("grid-norm", "grid box norm");
  gnorm->add_option("--input", fin.input)->required();
  gnorm->add_option("--dirs", fin.dirs)->required();
  gnorm->add_option("--mc", fin.mc, "Monte Carlo samples (0 = exact)");
  auto* witness = app.add_subcommand("inverse-witness", "constructive inverse witness");
  witness->add_option("--input", fin.input)->required();
  witness->add_flag("--u2", fin.u2, "U^2 witness instead of the box pipeline");
  auto* regularity = app.add_subcommand("regularity", "arithmetic regularity decomposition");
  regularity->add_option("--input", fin.input)->required();
  regularity->add_option("--eps", fin.eps);

  // -------------------------------------------------------- corners family
  struct {
    std::string set, v1 = "1,0", v2 = "0,1", seq_spec = "id", A = "A";
    uint64_t N = 100;
    double eps = 0.05;
  } co;
  auto* corners = app.add_subcommand("corners", "corner counts and scans");
  corners->require_subcommand(1);
  auto* cscan = corners->add_subcommand("scan", "popular-difference scan over a plane set");
  cscan->add_option("--set", co.set)->required();
  cscan->add_option("--v1", co.v1);
  cscan->add_option("--v2", co.v2);
  cscan->add_option("--seq", co.seq_spec);
  cscan->add_option("--N", co.N);
  cscan->add_option("--eps", co.eps);
  auto* cpop = corners->add_subcommand("popular", "popular-difference scan on a finite system");
  cpop->add_option("--A", co.A);
  cpop->add_option("--seq", co.seq_spec);
  cpop->add_option("--N", co.N);
  cpop->add_option("--eps", co.eps);

  // --------------------------------------------------------- verify family
  struct {
    std::string seq_spec = "id", Ns = "1000", beta = "0", alpha = "sqrt2m1", p, F = "1 0 1 0";
    uint64_t N = 1000;
    int kmax = 4;
  } vf;
  auto* verify = app.add_subcommand("verify", "limiting identity checks");
  verify->require_subcommand(1);
  auto* videntity = verify->add_subcommand("identity", "averages along a(n) vs n");
  videntity->add_option("--seq", vf.seq_spec);
  videntity->add_option("--Ns", vf.Ns);
  auto* vfact = verify->add_subcommand("factorial", "averages along p(k!n+n_k) vs k!n");
  vfact->add_option("--p", vf.p)->required();
  vfact->add_option("--kmax", vf.kmax);
  vfact->add_option("--N", vf.N);
  auto* vweyl = verify->add_subcommand("weyl", "Weyl sum magnitudes");
  vweyl->add_option("--seq", vf.seq_spec);
  vweyl->add_option("--beta", vf.beta);
  vweyl->add_option("--Ns", vf.Ns);
  auto* vnil = verify->add_subcommand("nil", "skew-product orbit averages");
  vnil->add_option("--seq", vf.seq_spec);
  vnil->add_option("--alpha", vf.alpha);
  vnil->add_option("--Ns", vf.Ns);
  vnil->add_option("--F", vf.F);
  auto* vlinear = verify->add_subcommand("linear", "optimal seminorm control for linear averages");

  std::vector<std::string> argv_copy = args;
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>("lab"));
  for (auto& a : argv_copy) argv.push_back(a.data());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
      if (pe.get_exit_code() == 0) {  // --help
        std::cout << app.help() << std::flush;
        return 0;
      }
      throw ValidationError(pe.what());
    }
    set_global_workers(ctx.g.workers);
    set_op_budget(ctx.g.budget_ms * 200'000ull);  // nominal ops per ms
    if (!ctx.g.config.empty()) ctx.manifest.config_digest = parse_config(ctx.g.config).raw.digest();
    ctx.manifest.seed = ctx.g.seed;
    auto elapsed_ms = [&]() {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - ctx.t0)
          .count();
    };

    if (seval->parsed()) {
      SequenceSpec s = SequenceSpec::parse(sq.seq_spec);
      json j = ctx.artifact_header();
      j["n"] = sq.n;
      j["value"] = sequence_eval(s, sq.n).str();
      ctx.emit_summary(j);
      return 0;
    }
    if (snk->parsed()) {
      uint64_t nk = find_nk(PolynomialZ::parse(sq.p), sq.k);
      json j = ctx.artifact_header();
      j["n_k"] = nk;
      ctx.emit_summary(j);
      return 0;
    }
    if (sint->parsed()) {
      auto v = is_intersective_bounded(PolynomialZ::parse(sq.p), sq.prime_bound, sq.lift_bound);
      json j = ctx.artifact_header();
      if (v.obstructed) {
        j["verdict"] = "NotIntersective";
        j["witness_modulus"] = v.witness_modulus;
      } else {
        j["verdict"] = "NoObstructionUpTo";
        j["prime_bound"] = v.prime_bound;
        j["lift_bound"] = v.lift_bound;
      }
      ctx.emit_summary(j);
      return 0;
    }
    if (sres->parsed()) {
      auto hist = residue_distribution(SequenceSpec::parse(sq.seq_spec), sq.q, sq.N);
      json j = ctx.artifact_header();
      j["histogram"] = hist;
      ctx.emit_summary(j);
      return 0;
    }
    if (scls->parsed()) {
      auto v = classify_log_away(HardyExpr::parse(sq.hardy));
      json j = ctx.artifact_header();
      j["verdict"] = v.kind == LogAwayVerdict::Kind::Satisfied
                         ? "Satisfied"
                         : v.kind == LogAwayVerdict::Kind::Violated ? "Violated" : "Unknown";
      if (v.kind == LogAwayVerdict::Kind::Violated) {
        j["c"] = v.c;
        j["p"] = v.p.to_string();
      }
      ctx.emit_summary(j);
      return 0;
    }

    if (seminorm->parsed() || dual->parsed()) {
      ExperimentConfig cfg = ctx.cfg();
      FiniteSystem sys = cfg.build_system();
      Observable f = cfg.build_observable(sm.f, sys, ctx.g.seed);
      SeminormSpec spec = SeminormSpec::parse(sm.words, sys.gens());
      json j = ctx.artifact_header();
      std::vector<long long> periods;
      for (const auto& w : spec.words) periods.push_back(map_order(sys, w));
      j["s"] = spec.s();
      j["periods"] = periods;
      if (seminorm->parsed()) {
        j["value"] = box_seminorm(sys, f, spec);
      } else {
        Observable D = dual_function_same(sys, f, spec);
        cplx pairing = inner(sys, f, Observable::from_values(
                                         std::vector<cplx>(D.values.begin(), D.values.end())));
        // <f, conj D> is integral f . D
        KahanCSum ac;
        for (int x = 0; x < sys.m; ++x) ac.add(sys.weights[x] * f.values[x] * D.values[x]);
        pairing = ac.value();
        double pw = box_seminorm_pow(sys, f, spec);
        j["pairing"] = {pairing.real(), pairing.imag()};
        j["seminorm_pow"] = pw;
        j["dual_identity_gap"] = std::abs(pairing - cplx(pw, 0.0));
      }
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }
    if (cube->parsed() || magic->parsed()) {
      ExperimentConfig cfg = ctx.cfg();
      FiniteSystem sys = cfg.build_system();
      SeminormSpec spec = SeminormSpec::parse(sm.words, sys.gens());
      json j = ctx.artifact_header();
      if (cube->parsed()) {
        CubeSystem cs = cubic_measure(sys, spec.words);
        j["support"] = cs.support.size();
        j["s"] = cs.s;
        if (sm.check_duality) {
          Rng rng(ctx.g.seed, 0x63756265);
          Observable f = Observable::random_unimodular(sys.m, rng);
          double pw = box_seminorm_pow(sys, f, spec);
          // cube pairing: integral of the conjugation-twisted tensor
          KahanCSum acc;
          for (size_t t = 0; t < cs.support.size(); ++t) {
            cplx prod = 1.0;
            for (int p = 0; p < cs.dim(); ++p) {
              cplx v = f.values[cs.support[t][p]];
              prod *= (__builtin_popcount(static_cast<unsigned>(p)) & 1) ? std::conj(v) : v;
            }
            acc.add(cs.weights[t] * prod);
          }
          j["cube_pairing"] = acc.value().real();
          j["seminorm_pow"] = pw;
          j["duality_gap"] = std::abs(acc.value().real() - pw);
        }
      } else {
        CubeSystem cs = magic_extension(sys, spec.words);
        j["support"] = cs.support.size();
        j["s"] = cs.s;
        if (sm.check_property) {
          FiniteSystem ext = cs.as_system(cs.side_maps);
          Rng rng(ctx.g.seed, 0x6d616769);
          Observable g = Observable::random_unimodular(ext.m, rng);
          OrbitPartition joint = OrbitPartition::of(cs.side_maps[0]);
          for (int i = 1; i < cs.s; ++i)
            joint = OrbitPartition::join(joint, OrbitPartition::of(cs.side_maps[i]));
          Observable proj = orbit_average(g, joint);
          std::vector<cplx> resid(ext.m);
          for (int x = 0; x < ext.m; ++x) resid[x] = g.values[x] - proj.values[x];
          Observable r = Observable::from_values(std::move(resid));
          SeminormSpec extspec;
          for (int i = 0; i < cs.s; ++i)
            extspec.words.push_back(TransformationWord::unit(cs.s, i));
          double val = box_seminorm(ext, r, extspec);
          j["residual_seminorm"] = val;
          j["residual_l2"] = l2_norm(ext, r);
          j["magic_property_holds"] = val <= 1e-8;
        }
      }
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }

    if (gnorm->parsed()) {
      GridFunction f = grid_load(fin.input);
      DirectionSet dirs = DirectionSet::parse(fin.dirs, f.ell);
      GridNormResult r = grid_box_norm(f, dirs, fin.mc, ctx.g.seed);
      json j = ctx.artifact_header();
      j["value"] = r.value;
      j["pow_value"] = r.pow_value;
      j["monte_carlo"] = r.monte_carlo;
      if (r.monte_carlo) {
        j["std_error"] = r.std_error;
        j["samples"] = r.samples;
      }
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }
    if (witness->parsed()) {
      GridFunction f = grid_load(fin.input);
      json j = ctx.artifact_header();
      if (fin.u2) {
        U2Witness w = u2_inverse_witness(f);
        j["correlation"] = w.correlation;
        j["norm_pow"] = w.norm_pow;
        j["delta"] = w.delta;
        j["c_achieved"] = w.c_achieved;
      } else {
        BoxWitness w = box_inverse_witness(f, 200, ctx.g.seed);
        j["correlation"] = w.correlation;
        j["m_star"] = w.m_star;
        j["norm_pow"] = w.norm_pow;
        j["c_achieved"] = w.c_achieved;
      }
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }
    if (regularity->parsed()) {
      GridFunction f = grid_load(fin.input);
      RegularityOutput out = regularity_decompose(f, fin.eps, default_growth);
      json j = ctx.artifact_header();
      j["M"] = out.M;
      j["sml_l2"] = out.sml_l2;
      j["unif_norm_pow"] = out.unif_norm_pow;
      j["unif_threshold_pow"] = out.unif_threshold_pow;
      j["converged"] = out.converged;
      j["rounds"] = out.rounds;
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }

    if (cscan->parsed() || cpop->parsed()) {
      SequenceSpec s = SequenceSpec::parse(co.seq_spec);
      CornerScanReport rep;
      json j = ctx.artifact_header();
      if (cscan->parsed()) {
        PlaneSet L = plane_load(co.set);
        PlaneTarget target{&L, parse_vec2(co.v1), parse_vec2(co.v2)};
        rep = popular_scan(target, s, co.N, co.eps);
      } else {
        ExperimentConfig cfg = ctx.cfg();
        FiniteSystem sys = cfg.build_system();
        Observable A = cfg.build_observable(co.A, sys, ctx.g.seed);
        std::vector<uint8_t> flags(sys.m, 0);
        for (int x = 0; x < sys.m; ++x) flags[x] = std::abs(A.values[x]) > 0.5 ? 1 : 0;
        SystemTarget target{&sys, flags};
        rep = popular_scan(target, s, co.N, co.eps);
      }
      std::ostringstream csv;
      csv << "n,shift,density,above_threshold\n";
      for (const auto& r : rep.records)
        csv << r.n << "," << r.shift_mod << "," << r.density << ","
            << (r.density >= rep.threshold ? 1 : 0) << "\n";
      ctx.write_artifact("corners_scan.csv", csv.str());
      j["base_density"] = rep.base_density;
      j["threshold"] = rep.threshold;
      j["good_count"] = rep.good_set.size();
      j["max_gap"] = rep.max_gap;
      j["lower_density_of_good_set"] = rep.lower_density_of_good_set;
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }

    if (videntity->parsed() || vfact->parsed() || vlinear->parsed()) {
      ExperimentConfig cfg = ctx.cfg();
      FiniteSystem sys = cfg.build_system();
      Observable f0 = cfg.build_observable("f0", sys, ctx.g.seed);
      Observable f1 = cfg.build_observable("f1", sys, ctx.g.seed + 1);
      Observable f2 = cfg.build_observable("f2", sys, ctx.g.seed + 2);
      json j = ctx.artifact_header();
      if (videntity->parsed()) {
        IdentityReport rep = compare_averages(sys, f0, f1, f2, SequenceSpec::parse(vf.seq_spec),
                                              parse_u64_list(vf.Ns));
        ctx.write_artifact("identity_report.csv", identity_report_csv(rep));
        j["report"] = identity_report_json(rep);
      } else if (vfact->parsed()) {
        std::vector<int> ks;
        for (int k = 1; k <= vf.kmax; ++k) ks.push_back(k);
        auto reps = compare_factorial(sys, f0, f1, f2, PolynomialZ::parse(vf.p), ks, vf.N);
        json arr = json::array();
        for (const auto& [k, rep] : reps)
          arr.push_back({{"k", k}, {"report", identity_report_json(rep)}});
        j["per_k"] = arr;
      } else {
        auto [lhs, rhs] = linear_control_check(sys, f0, f1, f2);
        j["lhs"] = lhs;
        j["rhs"] = rhs;
        j["holds"] = lhs <= rhs + 1e-9;
      }
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }
    if (vweyl->parsed()) {
      WeylReport rep = weyl_sum(SequenceSpec::parse(vf.seq_spec), Frac128::parse(vf.beta),
                                parse_u64_list(vf.Ns));
      json j = ctx.artifact_header();
      json mags = json::array();
      std::ostringstream csv;
      csv << "N,magnitude\n";
      for (const auto& [N, m] : rep.magnitudes) {
        mags.push_back({{"N", N}, {"magnitude", m}});
        csv << N << "," << m << "\n";
      }
      ctx.write_artifact("weyl_report.csv", csv.str());
      j["magnitudes"] = mags;
      j["classification"] = rep.classification;
      if (rep.classification == "tends_to_positive") j["limit_estimate"] = rep.limit_estimate;
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }
    if (vnil->parsed()) {
      SkewProductSystem skew;
      skew.alpha = Frac128::parse(vf.alpha);
      IdentityReport rep = nil_orbit_average(skew, TrigPoly::parse(vf.F),
                                             SequenceSpec::parse(vf.seq_spec),
                                             parse_u64_list(vf.Ns));
      ctx.write_artifact("nil_report.csv", identity_report_csv(rep));
      json j = ctx.artifact_header();
      j["report"] = identity_report_json(rep);
      j["runtime_ms"] = elapsed_ms();
      ctx.emit_summary(j);
      return 0;
    }
    throw ValidationError("no subcommand handler matched");
  } catch (const BudgetError& ex) {
    std::cout << json{{"error", ex.what()}, {"kind", "budget"}}.dump() << "\n";
    return 3;
  } catch (const PrecisionError& ex) {
    std::cout << json{{"error", ex.what()}, {"kind", "precision"}}.dump() << "\n";
    return 3;
  } catch (const ValidationError& ex) {
    std::cout << json{{"error", ex.what()}, {"kind", "validation"}}.dump() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cout << json{{"error", ex.what()}, {"kind", "validation"}}.dump() << "\n";
    return 2;
  }
}

}  // namespace lab
