#include "pcsplit/problem_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pcsplit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error("problem file: " + path + ": " + what);
}

const json& field(const json& obj, const std::string& ctx, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    fail(ctx.empty() ? name : ctx + "." + name, "missing");
  }
  return obj.at(name);
}

double number_at(const json& obj, const std::string& ctx, const char* name) {
  const json& v = field(obj, ctx, name);
  if (!v.is_number()) fail(ctx + "." + name, "expected a number");
  return v.get<double>();
}

Vector parse_vector(const json& v, const std::string& ctx, int expected = -1) {
  if (!v.is_array()) fail(ctx, "expected an array of numbers");
  Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(ctx, "entry " + std::to_string(i) + " is not a number");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  if (expected >= 0 && out.size() != expected) {
    fail(ctx, "expected " + std::to_string(expected) + " entries, got " +
                  std::to_string(out.size()));
  }
  return out;
}

Matrix parse_matrix(const json& v, const std::string& ctx, int rows) {
  if (!v.is_array() || v.empty()) fail(ctx, "expected a nonempty array of rows");
  if (rows >= 0 && static_cast<int>(v.size()) != rows) {
    fail(ctx, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
  }
  Vector first = parse_vector(v[0], ctx + "[0]");
  Matrix out(v.size(), first.size());
  out.row(0) = first;
  for (size_t r = 1; r < v.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        parse_vector(v[r], ctx + "[" + std::to_string(r) + "]", static_cast<int>(first.size()));
  }
  return out;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

ProblemInstance load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("problem file: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("problem file: " + path + ": " + e.what());
  }

  ProblemInstance p;
  const json& mj = field(doc, "", "m");
  if (!mj.is_number_integer() || mj.get<int>() < 1) fail("m", "expected a positive integer");
  const int m = mj.get<int>();

  const json& sj = field(doc, "", "sense");
  const std::string sense = sj.is_string() ? sj.get<std::string>() : "";
  if (sense == "eq") {
    p.sense = ConstraintSense::Equality;
  } else if (sense == "ge") {
    p.sense = ConstraintSense::Inequality;
  } else {
    fail("sense", "expected \"eq\" or \"ge\"");
  }

  p.rhs = parse_vector(field(doc, "", "rhs"), "rhs", m);

  const json& bj = field(doc, "", "blocks");
  if (!bj.is_array() || bj.empty()) fail("blocks", "expected a nonempty array");
  for (size_t i = 0; i < bj.size(); ++i) {
    const std::string ctx = "blocks[" + std::to_string(i) + "]";
    const json& b = bj[i];
    Block blk;
    blk.A = parse_matrix(field(b, ctx, "A"), ctx + ".A", m);
    const int n = static_cast<int>(blk.A.cols());

    const json& kj = field(b, ctx, "kind");
    const std::string kind = kj.is_string() ? kj.get<std::string>() : "";
    const json params = b.contains("params") ? b.at("params") : json::object();
    if (kind == "quadratic") {
      Matrix P = parse_matrix(field(params, ctx + ".params", "P"), ctx + ".params.P", n);
      if (P.cols() != n) fail(ctx + ".params.P", "expected a square matrix of block size");
      Vector q = parse_vector(field(params, ctx + ".params", "q"), ctx + ".params.q", n);
      blk.theta = BlockFunction::quadratic(std::move(P), std::move(q));
    } else if (kind == "l1") {
      blk.theta = BlockFunction::l1(number_at(params, ctx + ".params", "weight"));
    } else if (kind == "zero") {
      blk.theta = BlockFunction::zero();
    } else if (kind == "box") {
      Vector lo = parse_vector(field(params, ctx + ".params", "lo"), ctx + ".params.lo", n);
      Vector hi = parse_vector(field(params, ctx + ".params", "hi"), ctx + ".params.hi", n);
      blk.theta = BlockFunction::box_indicator(std::move(lo), std::move(hi));
    } else {
      fail(ctx + ".kind", "expected one of quadratic, l1, zero, box");
    }

    if (b.contains("set")) {
      const json& s = b.at("set");
      const json& skj = field(s, ctx + ".set", "kind");
      const std::string skind = skj.is_string() ? skj.get<std::string>() : "";
      if (skind == "free") {
        blk.set.kind = BlockSet::Kind::Free;
      } else if (skind == "box") {
        blk.set.kind = BlockSet::Kind::Box;
        blk.set.lo = parse_vector(field(s, ctx + ".set", "lo"), ctx + ".set.lo", n);
        blk.set.hi = parse_vector(field(s, ctx + ".set", "hi"), ctx + ".set.hi", n);
      } else {
        fail(ctx + ".set.kind", "expected \"free\" or \"box\"");
      }
    }
    p.blocks.push_back(std::move(blk));
  }

  try {
    p.check_invariants();
  } catch (const Error& e) {
    throw Error("problem file: " + path + ": " + e.what());
  }
  return p;
}

void write_solution_json(const std::string& path, const ProblemInstance& p,
                         const RunConfig& cfg, const SolveResult& result) {
  json doc;
  doc["scheme"] = scheme_name(cfg.scheme);
  doc["beta"] = cfg.beta;
  if (cfg.scheme == Scheme::ScPrsm) doc["mu"] = cfg.mu;
  if (cfg.scheme == Scheme::Gs3Alg1 || cfg.scheme == Scheme::Gs3Alg2 ||
      cfg.scheme == Scheme::MultiPD || cfg.scheme == Scheme::MultiDP) {
    doc["nu"] = cfg.nu;
  }
  if (cfg.scheme == Scheme::CustomSplit) doc["alpha"] = cfg.alpha;
  doc["tol"] = cfg.tol;
  doc["seed"] = cfg.seed;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  json blocks = json::array();
  for (const Vector& x : result.x_blocks) blocks.push_back(vector_to_json(x));
  doc["blocks"] = blocks;
  doc["lambda"] = vector_to_json(result.lambda);
  doc["residuals"] = {{"primal", result.residuals.primal},
                      {"dual", result.residuals.dual},
                      {"comp", result.residuals.comp}};
  doc["final_pred_norm"] = result.final_pred_norm;
  doc["total_progress_G"] = result.total_progress_G;
  (void)p;

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace pcsplit
