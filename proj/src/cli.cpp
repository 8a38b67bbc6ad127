#include "cpext/cli.hpp"

#include "cpext/convexity.hpp"
#include "cpext/extremal.hpp"
#include "cpext/rand.hpp"
#include "cpext/serialize.hpp"
#include "cpext/suite.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace cpext {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitDomain = 1;
constexpr int kExitParse = 2;
constexpr int kExitInconclusive = 3;

void emit(const Json& j, std::ostream& out, const std::string& json_out) {
  out << j.dump(2) << "\n";
  if (!json_out.empty()) write_json_file(json_out, j);
}

CMatrix parse_unit_spec(const std::string& spec, int d, uint64_t seed) {
  Rng rng(seed ^ 0x5eedu);
  if (spec.empty() || spec == "identity") return CMatrix::Identity(d, d);
  if (spec == "zero") return CMatrix::Zero(d, d);
  if (spec == "random") return rng.psd_invertible(d);
  if (spec == "random-projection") return rng.projection(d, rng.uniform_int(1, d));
  if (spec == "random-psd") return rng.psd(d, rng.uniform_int(1, d));
  if (spec.rfind("diag:", 0) == 0) {
    std::vector<double> vals;
    std::stringstream ss(spec.substr(5));
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (static_cast<int>(vals.size()) != d) {
      throw Error(ErrorCode::InvalidSpec, "diag: needs exactly hdim entries");
    }
    CMatrix p = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) p(i, i) = vals[static_cast<size_t>(i)];
    return p;
  }
  if (spec.rfind("@", 0) == 0) {
    return matrix_from_json(load_json_file(spec.substr(1)), d, d);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown unit spec '" + spec + "'");
}

Model parse_model(const std::string& name, const CpMap& map, const Tolerances& tol) {
  if (name == "ucp") return Model::Ucp;
  if (name == "cp-p") return Model::CpP;
  if (name == "ccp") return Model::Ccp;
  if (name != "auto") throw Error(ErrorCode::InvalidSpec, "unknown model '" + name + "'");
  VerifyReport vr = verify(map, tol);
  if (vr.is_unital) return Model::Ucp;
  if (is_projection_matrix(linalg::hermitize(unit_image(map)), tol)) return Model::Ccp;
  return Model::CpP;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidSpec:
      return kExitParse;
    case ErrorCode::ReconstructionFailure:
      return kExitInconclusive;
    default:
      return kExitDomain;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CP-map toolkit: Choi/Stinespring calculus and C*-extremality certificates"};
  app.require_subcommand(1);

  Tolerances tol;
  app.add_option("--tol-eig", tol.eig_cut, "relative eigenvalue cutoff for PSD/rank decisions");
  app.add_option("--tol-inv", tol.inv_cut, "relative singular-value cutoff for invertibility");
  app.add_option("--tol-eq", tol.eq_tol, "relative Frobenius tolerance for equality");
  std::string json_out;
  app.add_option("--json-out", json_out, "also write the JSON result to this path");
  app.fallthrough();

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "check CP/contractive/unital structure");
  std::string verify_path;
  cmd_verify->add_option("map", verify_path, "MapFile path")->required();

  // extreme
  auto* cmd_extreme = app.add_subcommand("extreme", "decide C*-extremality with certificates");
  std::string extreme_path, extreme_model = "auto";
  uint64_t extreme_seed = 0;
  cmd_extreme->add_option("map", extreme_path)->required();
  cmd_extreme->add_option("--model", extreme_model, "auto|ucp|cp-p|ccp");
  cmd_extreme->add_option("--seed", extreme_seed, "seed for randomized steps")->required();

  // dilate
  auto* cmd_dilate = app.add_subcommand("dilate", "minimal Stinespring dilation");
  std::string dilate_path;
  cmd_dilate->add_option("map", dilate_path)->required();

  // rn
  auto* cmd_rn = app.add_subcommand("rn", "Radon-Nikodym derivative of PSI w.r.t. PHI");
  std::string rn_phi, rn_psi;
  cmd_rn->add_option("phi", rn_phi)->required();
  cmd_rn->add_option("psi", rn_psi)->required();

  // equiv
  auto* cmd_equiv = app.add_subcommand("equiv", "test unitary/invertible equivalence");
  std::string equiv_phi, equiv_psi, equiv_mode = "unitary";
  uint64_t equiv_seed = 0;
  cmd_equiv->add_option("phi", equiv_phi)->required();
  cmd_equiv->add_option("psi", equiv_psi)->required();
  cmd_equiv->add_option("--mode", equiv_mode, "unitary|invertible");
  cmd_equiv->add_option("--seed", equiv_seed)->required();

  // gen
  auto* cmd_gen = app.add_subcommand("gen", "generate a seeded instance");
  std::string gen_kind, gen_algebra = "2", gen_unit = "identity";
  int gen_hdim = 2;
  uint64_t gen_seed = 0;
  cmd_gen->add_option("--kind", gen_kind, "random_cp_p|pure|pure_state_times_P|nested_extreme|non_extreme_mixture|homomorphism")->required();
  cmd_gen->add_option("--algebra", gen_algebra, "comma-separated block sizes");
  cmd_gen->add_option("--hdim", gen_hdim);
  cmd_gen->add_option("--unit", gen_unit, "identity|zero|random|random-projection|random-psd|diag:..|@file");
  cmd_gen->add_option("--seed", gen_seed)->required();

  // km
  auto* cmd_km = app.add_subcommand("km", "two-term reduction to projection-unit terms");
  std::string km_path;
  cmd_km->add_option("map", km_path)->required();

  // check
  auto* cmd_check = app.add_subcommand("check", "re-validate a report against its map");
  std::string check_report, check_map;
  cmd_check->add_option("report", check_report)->required();
  cmd_check->add_option("map", check_map)->required();

  // suite
  auto* cmd_suite = app.add_subcommand("suite", "run the property and acceptance suites");
  uint64_t suite_seed = 20240901;
  int suite_count = 1 << 30;
  std::string suite_dims = "4x6";
  cmd_suite->add_option("--seed", suite_seed);
  cmd_suite->add_option("--count", suite_count, "cap on instances per property (0 runs nothing)");
  cmd_suite->add_option("--dims", suite_dims, "max block size x max hdim, e.g. 4x6");

  std::vector<const char*> argv;
  argv.push_back("cpext");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return kExitPass;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitParse;
  }

  try {
    tol.validate();

    if (*cmd_verify) {
      CpMap m = map_from_json(load_json_file(verify_path));
      VerifyReport r = verify(m, tol);
      emit(to_json(r), out, json_out);
      return r.is_cp ? kExitPass : kExitDomain;
    }

    if (*cmd_extreme) {
      CpMap m = map_from_json(load_json_file(extreme_path));
      Model model = parse_model(extreme_model, m, tol);
      VerifyReport vr = verify(m, tol);
      if (!vr.is_cp) throw Error(ErrorCode::NotCp, "input map is not CP");
      if (model == Model::Ucp && !vr.is_unital) {
        throw Error(ErrorCode::ModelMismatch, "ucp model requested for a non-unital map");
      }
      if (model == Model::Ccp && !vr.is_contractive) {
        throw Error(ErrorCode::ModelMismatch, "ccp model requested for a non-contractive map");
      }
      ExtremalityVerdict v;
      switch (model) {
        case Model::Ucp: v = ucp_cstar_extreme(m, tol, extreme_seed); break;
        case Model::CpP: v = cp_p_cstar_extreme(m, tol, extreme_seed); break;
        case Model::Ccp: v = ccp_cstar_extreme(m, tol, extreme_seed); break;
      }
      emit(report_to_json(v, tol), out, json_out);
      switch (v.kind) {
        case VerdictKind::Extreme: return kExitPass;
        case VerdictKind::NotExtreme: return kExitDomain;
        case VerdictKind::Inconclusive: return kExitInconclusive;
      }
    }

    if (*cmd_dilate) {
      CpMap m = map_from_json(load_json_file(dilate_path));
      emit(to_json(minimal_dilation(m, tol)), out, json_out);
      return kExitPass;
    }

    if (*cmd_rn) {
      CpMap phi = map_from_json(load_json_file(rn_phi));
      CpMap psi = map_from_json(load_json_file(rn_psi));
      CommutantElement d = rn_derivative(psi, phi, tol);
      emit(to_json(d), out, json_out);
      return kExitPass;
    }

    if (*cmd_equiv) {
      CpMap phi = map_from_json(load_json_file(equiv_phi));
      CpMap psi = map_from_json(load_json_file(equiv_psi));
      EquivalenceResult r;
      if (equiv_mode == "unitary") {
        r = equivalent_unitary(phi, psi, tol, equiv_seed);
      } else if (equiv_mode == "invertible") {
        r = equivalent_invertible(phi, psi, tol, equiv_seed);
      } else {
        throw Error(ErrorCode::InvalidSpec, "unknown mode '" + equiv_mode + "'");
      }
      Json j{{"equivalent", r.equivalent}, {"seed", equiv_seed}, {"mode", equiv_mode}};
      if (r.equivalent) j["conjugator"] = matrix_to_json(r.conjugator);
      emit(j, out, json_out);
      return r.equivalent ? kExitPass : kExitDomain;
    }

    if (*cmd_gen) {
      AlgebraSpec alg;
      std::stringstream ss(gen_algebra);
      std::string item;
      while (std::getline(ss, item, ',')) alg.blocks.push_back(std::stoi(item));
      CMatrix unit = parse_unit_spec(gen_unit, gen_hdim, gen_seed);
      CpMap m = gen(parse_gen_kind(gen_kind), alg, gen_hdim, unit, gen_seed, tol);
      Json j = to_json(m);
      j["generator"] = Json{{"kind", gen_kind}, {"seed", gen_seed}, {"unit", gen_unit}};
      emit(j, out, json_out);
      return kExitPass;
    }

    if (*cmd_km) {
      CpMap m = map_from_json(load_json_file(km_path));
      CombinationSpec spec = km_reduce_ccp(m, tol);
      emit(to_json(spec), out, json_out);
      return kExitPass;
    }

    if (*cmd_check) {
      CpMap m = map_from_json(load_json_file(check_map));
      Tolerances report_tol = tol;
      ExtremalityVerdict v = report_from_json(load_json_file(check_report), &report_tol);
      std::string why;
      bool ok = false;
      if (v.kind == VerdictKind::Extreme && v.certificate) {
        ok = check_certificate(m, *v.certificate, v.model, report_tol, &why);
      } else if (v.kind == VerdictKind::NotExtreme && v.witness) {
        ok = check_witness(m, *v.witness, v.model, report_tol, v.seed, &why);
      } else {
        why = "report carries no certificate or witness";
      }
      emit(Json{{"valid", ok}, {"why", why}}, out, json_out);
      return ok ? kExitPass : kExitDomain;
    }

    if (*cmd_suite) {
      SuiteConfig cfg;
      cfg.seed = suite_seed;
      cfg.count_cap = suite_count;
      cfg.tol = tol;
      const auto sep = suite_dims.find('x');
      if (sep == std::string::npos) {
        throw Error(ErrorCode::InvalidSpec, "--dims expects <max_block>x<max_hdim>");
      }
      cfg.max_block = std::stoi(suite_dims.substr(0, sep));
      cfg.max_hdim = std::stoi(suite_dims.substr(sep + 1));

      Json props = Json::array();
      Json crits = Json::array();
      bool all_pass = true;
      for (const PropertyResult& r : run_module_properties(cfg)) {
        props.push_back(Json{{"name", r.name}, {"ran", r.ran}, {"failed", r.failed},
                             {"pass", r.pass()}, {"detail", r.detail}});
        all_pass = all_pass && r.pass();
      }
      for (const PropertyResult& r : run_acceptance_criteria(cfg)) {
        crits.push_back(Json{{"name", r.name}, {"ran", r.ran}, {"failed", r.failed},
                             {"pass", r.pass()}, {"detail", r.detail}});
        all_pass = all_pass && r.pass();
      }
      emit(Json{{"seed", cfg.seed}, {"count_cap", cfg.count_cap}, {"properties", props},
                {"criteria", crits}, {"pass", all_pass}},
           out, json_out);
      return all_pass ? kExitPass : kExitDomain;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitParse;
}

}  // namespace cpext
