#include "cpext/cli.hpp"

#include "cpext/serialize.hpp"
#include "test_helpers.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cpext;
using namespace cpext::testing;

namespace {

const Tolerances tol;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("cpext_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& contents) {
    const std::string p = (path / name).string();
    std::ofstream f(p);
    f << contents;
    return p;
  }
};

std::string identity_map_json() { return to_json(CpMap::identity_map(2)).dump(); }

}  // namespace

TEST_CASE("verify: exit codes and report fields") {
  TempDir dir;
  const std::string good = dir.file("id.json", identity_map_json());
  CliRun r = run({"verify", good});
  CHECK(r.code == 0);
  Json j = parse_json(r.out);
  CHECK(j["is_cp"] == true);
  CHECK(j["is_unital"] == true);

  // Non-PSD fixture: eigenvalue diagnostic and exit 1.
  CpMap bad = CpMap::zero(AlgebraSpec{{1}}, 2);
  bad.choi[0] = mat2(1, 2, 2, 1);
  const std::string badpath = dir.file("bad.json", to_json(bad).dump());
  CliRun r2 = run({"verify", badpath});
  CHECK(r2.code == 1);
  Json j2 = parse_json(r2.out);
  CHECK(j2["is_cp"] == false);
  CHECK(j2["min_choi_eig"].get<double>() == doctest::Approx(-1.0));

  // Malformed JSON: exit 2.
  const std::string broken = dir.file("broken.json", "{nope");
  CHECK(run({"verify", broken}).code == 2);
}

TEST_CASE("extreme: verdict exit codes and self-checkable reports") {
  TempDir dir;
  const std::string id = dir.file("id.json", identity_map_json());
  CliRun r = run({"extreme", id, "--model", "auto", "--seed", "7"});
  CHECK(r.code == 0);
  Json j = parse_json(r.out);
  CHECK(j["verdict"] == "extreme");
  CHECK(j["model"] == "ucp");

  // Check path validates the emitted report.
  const std::string report = dir.file("report.json", r.out);
  CHECK(run({"check", report, id}).code == 0);

  // Diagonal map: not extreme, exit 1, witness re-validates.
  CpMap dm = CpMap::zero(AlgebraSpec{{2}}, 2);
  dm.choi[0](0, 0) = 1.0;
  dm.choi[0](3, 3) = 1.0;
  const std::string dpath = dir.file("diag.json", to_json(dm).dump());
  CliRun r2 = run({"extreme", dpath, "--model", "ucp", "--seed", "7"});
  CHECK(r2.code == 1);
  const std::string wreport = dir.file("wreport.json", r2.out);
  CHECK(run({"check", wreport, dpath}).code == 0);

  // Tampered report fails the check with exit 1.
  Json tampered = parse_json(r2.out);
  tampered["witness"]["nonequiv_index"] = 0;
  Json t2 = tampered;
  t2["witness"]["terms"][0]["t"][0][0][0] = 9.0;
  const std::string tpath = dir.file("tampered.json", t2.dump());
  CHECK(run({"check", tpath, dpath}).code == 1);

  // Model mismatch: ccp requested for a non-contractive map.
  CpMap big = 2.0 * CpMap::identity_map(2);
  const std::string bigpath = dir.file("big.json", to_json(big).dump());
  CHECK(run({"extreme", bigpath, "--model", "ccp", "--seed", "1"}).code == 1);

  // Seed is mandatory.
  CHECK(run({"extreme", id}).code == 2);
}

TEST_CASE("gen then extreme round trip") {
  TempDir dir;
  const std::string mpath = (dir.path / "gen.json").string();
  CliRun g = run({"--json-out", mpath, "gen", "--kind", "nested_extreme", "--algebra", "3",
                  "--hdim", "3", "--seed", "7"});
  CHECK(g.code == 0);
  Json j = parse_json(g.out);
  CHECK(j["generator"]["kind"] == "nested_extreme");

  // The emitted file drops the generator annotation on parse.
  CliRun e = run({"extreme", mpath, "--model", "auto", "--seed", "3"});
  CHECK(e.code == 0);

  CliRun mix = run({"gen", "--kind", "non_extreme_mixture", "--algebra", "2", "--hdim", "2",
                    "--unit", "random", "--seed", "11"});
  CHECK(mix.code == 0);
}

TEST_CASE("rn command emits a scalar derivative for scaled maps") {
  TempDir dir;
  Rng rng(3);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 2,
                       {{rng.gaussian_matrix(2, 2), rng.gaussian_matrix(2, 2)}});
  const std::string phip = dir.file("phi.json", to_json(m).dump());
  const std::string psip = dir.file("psi.json", to_json(0.5 * m).dump());
  CliRun r = run({"rn", phip, psip});
  CHECK(r.code == 0);
  CommutantElement d = commutant_from_json(parse_json(r.out));
  CHECK(dist(d.blocks[0], 0.5 * CMatrix::Identity(d.blocks[0].rows(), d.blocks[0].cols())) < 1e-8);

  // Non-dominated pair: domain failure.
  const std::string psib = dir.file("psib.json", to_json(2.0 * m).dump());
  CHECK(run({"rn", phip, psib}).code == 1);
}

TEST_CASE("equiv and km and dilate commands") {
  TempDir dir;
  Rng rng(5);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 2,
                       {{rng.gaussian_matrix(2, 2), rng.gaussian_matrix(2, 2)}});
  CpMap conj = adjoin(m, rng.unitary(2));
  const std::string a = dir.file("a.json", to_json(m).dump());
  const std::string b = dir.file("b.json", to_json(conj).dump());
  CliRun r = run({"equiv", a, b, "--mode", "unitary", "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(parse_json(r.out)["equivalent"] == true);

  CpMap other = CpMap::identity_map(2);
  const std::string c = dir.file("c.json", to_json(other).dump());
  CHECK(run({"equiv", a, c, "--mode", "unitary", "--seed", "3"}).code == 1);

  CliRun dil = run({"dilate", a});
  CHECK(dil.code == 0);
  CHECK(parse_json(dil.out).contains("mult"));

  // km on a non-unital invertible-unit fixture: projection/zero units.
  CpMap half = adjoin(m, CMatrix(0.9 * linalg::psd_inv_sqrt(unit_image(m), tol)));
  const std::string hpath = dir.file("half.json", to_json(half).dump());
  CliRun km = run({"km", hpath});
  CHECK(km.code == 0);
  CombinationSpec spec = combination_from_json(parse_json(km.out));
  CHECK(spec.terms.size() == 2);
}

TEST_CASE("suite command with count cap") {
  CliRun r = run({"suite", "--seed", "3", "--count", "2", "--dims", "2x3"});
  CHECK(r.code == 0);
  Json j = parse_json(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["properties"].size() > 0);
  for (const Json& p : j["properties"]) CHECK(p["ran"].get<int>() <= 2);

  // count 0: empty summary, exit 0.
  CliRun r0 = run({"suite", "--count", "0"});
  CHECK(r0.code == 0);
  Json j0 = parse_json(r0.out);
  CHECK(j0["properties"].empty());
  CHECK(j0["criteria"].empty());
}

TEST_CASE("deterministic reports from the CLI") {
  TempDir dir;
  CpMap dm = CpMap::zero(AlgebraSpec{{2}}, 2);
  dm.choi[0](0, 0) = 1.0;
  dm.choi[0](3, 3) = 1.0;
  const std::string path = dir.file("diag.json", to_json(dm).dump());
  CliRun r1 = run({"extreme", path, "--model", "ucp", "--seed", "5"});
  CliRun r2 = run({"extreme", path, "--model", "ucp", "--seed", "5"});
  CHECK(r1.out == r2.out);
}
