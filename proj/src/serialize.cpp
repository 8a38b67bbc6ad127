#include "cpext/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cpext {

namespace {

double number_from(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, std::string(what) + " must be finite");
  return v;
}

int int_from(const Json& j, const char* what) {
  if (!j.is_number_integer()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an integer");
  }
  return j.get<int>();
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

}  // namespace

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, int expect_rows, int expect_cols) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "matrix must be an array of rows");
  const int rows = static_cast<int>(j.size());
  int cols = expect_cols;
  if (rows > 0) {
    if (!j[0].is_array()) throw Error(ErrorCode::ParseError, "matrix row must be an array");
    cols = static_cast<int>(j[0].size());
  } else if (cols < 0) {
    cols = 0;
  }
  if (expect_rows >= 0 && rows != expect_rows) {
    throw Error(ErrorCode::ParseError, "matrix has wrong row count");
  }
  if (expect_cols >= 0 && cols != expect_cols) {
    throw Error(ErrorCode::ParseError, "matrix has wrong column count");
  }
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, "ragged matrix rows");
    }
    for (int c = 0; c < cols; ++c) {
      const Json& z = row[static_cast<size_t>(c)];
      if (!z.is_array() || z.size() != 2) {
        throw Error(ErrorCode::ParseError, "complex scalar must be a [re, im] pair");
      }
      m(r, c) = Complex(number_from(z[0], "re"), number_from(z[1], "im"));
    }
  }
  return m;
}

Json to_json(const Tolerances& t) {
  return Json{{"eig_cut", t.eig_cut}, {"inv_cut", t.inv_cut}, {"eq_tol", t.eq_tol},
              {"sym_tol", t.sym_tol}};
}

Tolerances tolerances_from_json(const Json& j) {
  Tolerances t;
  t.eig_cut = number_from(field(j, "eig_cut"), "eig_cut");
  t.inv_cut = number_from(field(j, "inv_cut"), "inv_cut");
  t.eq_tol = number_from(field(j, "eq_tol"), "eq_tol");
  t.sym_tol = number_from(field(j, "sym_tol"), "sym_tol");
  t.validate();
  return t;
}

Json to_json(const CpMap& m) {
  Json choi = Json::array();
  for (const CMatrix& c : m.choi) choi.push_back(matrix_to_json(c));
  return Json{{"algebra", m.algebra.blocks}, {"hdim", m.hdim}, {"choi", std::move(choi)}};
}

CpMap map_from_json(const Json& j) {
  CpMap m;
  const Json& alg = field(j, "algebra");
  if (!alg.is_array() || alg.empty()) {
    throw Error(ErrorCode::ParseError, "algebra must be a non-empty list of block sizes");
  }
  for (const Json& b : alg) m.algebra.blocks.push_back(int_from(b, "block size"));
  m.hdim = int_from(field(j, "hdim"), "hdim");
  if (m.hdim < 0) throw Error(ErrorCode::ParseError, "hdim must be non-negative");
  const Json& choi = field(j, "choi");
  if (!choi.is_array() || static_cast<int>(choi.size()) != m.algebra.num_blocks()) {
    throw Error(ErrorCode::ParseError, "choi must list one block per algebra block");
  }
  for (int i = 0; i < m.algebra.num_blocks(); ++i) {
    const int dim = m.algebra.block_size(i) * m.hdim;
    m.choi.push_back(matrix_from_json(choi[static_cast<size_t>(i)], dim, dim));
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return m;
}

Json to_json(const VerifyReport& r) {
  return Json{{"is_cp", r.is_cp},
              {"choi_hermitian", r.choi_hermitian},
              {"min_choi_eig", r.min_choi_eig},
              {"unit_class", unit_tag_name(r.unit.tag)},
              {"unit", matrix_to_json(r.unit.p)},
              {"is_contractive", r.is_contractive},
              {"is_unital", r.is_unital},
              {"norm", r.norm}};
}

Json to_json(const Dilation& d) {
  Json kraus = Json::array();
  for (const auto& list : d.kraus) {
    Json blocks = Json::array();
    for (const CMatrix& k : list) blocks.push_back(matrix_to_json(k));
    kraus.push_back(std::move(blocks));
  }
  return Json{{"algebra", d.algebra.blocks}, {"hdim", d.hdim},   {"mult", d.mult},
              {"kdim", d.kdim},              {"v", matrix_to_json(d.v)}, {"kraus", std::move(kraus)}};
}

Dilation dilation_from_json(const Json& j) {
  Dilation d;
  for (const Json& b : field(j, "algebra")) d.algebra.blocks.push_back(int_from(b, "block size"));
  d.hdim = int_from(field(j, "hdim"), "hdim");
  for (const Json& m : field(j, "mult")) d.mult.push_back(int_from(m, "mult"));
  d.kdim = int_from(field(j, "kdim"), "kdim");
  d.v = matrix_from_json(field(j, "v"), d.kdim, d.hdim);
  const Json& kraus = field(j, "kraus");
  for (size_t i = 0; i < kraus.size(); ++i) {
    std::vector<CMatrix> list;
    for (const Json& k : kraus[i]) {
      list.push_back(matrix_from_json(k, d.algebra.block_size(static_cast<int>(i)), d.hdim));
    }
    d.kraus.push_back(std::move(list));
  }
  return d;
}

Json to_json(const CommutantElement& e) {
  Json blocks = Json::array();
  for (const CMatrix& b : e.blocks) blocks.push_back(matrix_to_json(b));
  return Json{{"blocks", std::move(blocks)}};
}

CommutantElement commutant_from_json(const Json& j) {
  CommutantElement e;
  for (const Json& b : field(j, "blocks")) e.blocks.push_back(matrix_from_json(b));
  return e;
}

Json to_json(const NestedStructure& c) {
  Json groups = Json::array();
  for (const auto& group : c.groups) {
    Json g = Json::array();
    for (const PureSummand& s : group) {
      g.push_back(Json{{"block", s.block},
                       {"basis_h", matrix_to_json(s.basis_h)},
                       {"isometry", matrix_to_json(s.isometry)}});
    }
    groups.push_back(std::move(g));
  }
  return Json{{"groups", std::move(groups)}, {"conjugator", matrix_to_json(c.conjugator)}};
}

NestedStructure certificate_from_json(const Json& j) {
  NestedStructure c;
  for (const Json& g : field(j, "groups")) {
    std::vector<PureSummand> group;
    for (const Json& s : g) {
      PureSummand ps;
      ps.block = int_from(field(s, "block"), "block");
      ps.basis_h = matrix_from_json(field(s, "basis_h"));
      ps.isometry = matrix_from_json(field(s, "isometry"));
      group.push_back(std::move(ps));
    }
    c.groups.push_back(std::move(group));
  }
  c.conjugator = matrix_from_json(field(j, "conjugator"));
  return c;
}

Json to_json(const DecompositionWitness& w) {
  Json terms = Json::array();
  for (const auto& term : w.terms) {
    terms.push_back(Json{{"t", matrix_to_json(term.t)}, {"map", to_json(term.map)}});
  }
  return Json{{"terms", std::move(terms)}, {"nonequiv_index", w.nonequiv_index}};
}

DecompositionWitness witness_from_json(const Json& j) {
  DecompositionWitness w;
  for (const Json& t : field(j, "terms")) {
    w.terms.push_back({matrix_from_json(field(t, "t")), map_from_json(field(t, "map"))});
  }
  w.nonequiv_index = int_from(field(j, "nonequiv_index"), "nonequiv_index");
  return w;
}

Json report_to_json(const ExtremalityVerdict& v, const Tolerances& tol) {
  Json out{{"verdict", verdict_kind_name(v.kind)},
           {"model", model_name(v.model)},
           {"diagnostics",
            Json{{"note", v.diagnostics}, {"seed", v.seed}, {"tolerances", to_json(tol)}}}};
  if (v.certificate) out["certificate"] = to_json(*v.certificate);
  if (v.witness) out["witness"] = to_json(*v.witness);
  return out;
}

ExtremalityVerdict report_from_json(const Json& j, Tolerances* tol_out) {
  ExtremalityVerdict v;
  const std::string kind = field(j, "verdict").get<std::string>();
  if (kind == "extreme") {
    v.kind = VerdictKind::Extreme;
  } else if (kind == "not_extreme") {
    v.kind = VerdictKind::NotExtreme;
  } else if (kind == "inconclusive") {
    v.kind = VerdictKind::Inconclusive;
  } else {
    throw Error(ErrorCode::ParseError, "unknown verdict tag '" + kind + "'");
  }
  const std::string model = field(j, "model").get<std::string>();
  if (model == "ucp") {
    v.model = Model::Ucp;
  } else if (model == "cp-p") {
    v.model = Model::CpP;
  } else if (model == "ccp") {
    v.model = Model::Ccp;
  } else {
    throw Error(ErrorCode::ParseError, "unknown model tag '" + model + "'");
  }
  const Json& diag = field(j, "diagnostics");
  v.diagnostics = field(diag, "note").get<std::string>();
  v.seed = field(diag, "seed").get<uint64_t>();
  if (tol_out) *tol_out = tolerances_from_json(field(diag, "tolerances"));
  if (j.contains("certificate")) v.certificate = certificate_from_json(j.at("certificate"));
  if (j.contains("witness")) v.witness = witness_from_json(j.at("witness"));
  return v;
}

Json to_json(const CombinationSpec& s) {
  Json terms = Json::array();
  for (const auto& term : s.terms) {
    terms.push_back(Json{{"t", matrix_to_json(term.t)}, {"map", to_json(term.map)}});
  }
  return Json{{"p", matrix_to_json(s.p)}, {"terms", std::move(terms)}, {"proper", s.proper}};
}

CombinationSpec combination_from_json(const Json& j) {
  CombinationSpec s;
  s.p = matrix_from_json(field(j, "p"));
  for (const Json& t : field(j, "terms")) {
    s.terms.push_back({matrix_from_json(field(t, "t")), map_from_json(field(t, "map"))});
  }
  s.proper = field(j, "proper").get<bool>();
  return s;
}

Json parse_json(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, "malformed JSON");
  return j;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace cpext
