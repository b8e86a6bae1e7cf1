#pragma once

// Artifact I/O: atomic file writes (temp + rename), CSV emission with fixed
// formatting ('.' decimal, LF endings, %.17g), and JSON serialization of the
// library's value types.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipreg/basis.hpp"
#include "lipreg/dataset.hpp"
#include "lipreg/entropylab.hpp"
#include "lipreg/measures.hpp"

namespace lipreg {

using Json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes content to path via a temporary file in the same directory; an
// interrupted run never leaves a partial file at the declared path.
inline void write_atomic(const std::filesystem::path& path,
                         const std::string& content) {
  const std::filesystem::path tmp =
      path.string() + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("write_atomic: cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("write_atomic: write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header) : columns_(header.size()) {
    append_row(header);
  }

  void append_row(const std::vector<std::string>& cells) {
    require(cells.size() == columns_, "csv: wrong column count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  const std::string& str() const { return body_; }

 private:
  std::size_t columns_;
  std::string body_;
};

inline Json measure_to_json(const MeasureSpec& m) {
  return Json{{"kind", measure_kind_name(m.kind)},
              {"dimension", m.dimension},
              {"isotropic", m.isotropic}};
}

inline MeasureSpec measure_from_json(const Json& j) {
  MeasureSpec m;
  m.kind = measure_kind_from_name(j.at("kind").get<std::string>());
  m.dimension = j.at("dimension").get<int>();
  if (m.dimension < 1) throw ConfigError("measure: dimension must be >= 1");
  m.isotropic = j.value("isotropic", true);
  return m;
}

inline Json poly_to_json(const PolyInBasis& p) {
  Json j;
  j["schema"] = 1;
  j["measure"] = measure_to_json(p.measure);
  j["d"] = p.indices->dimension();
  j["m"] = p.indices->max_degree();
  j["ordering"] = "graded-lex";
  std::vector<double> coeffs(p.coeffs.data(), p.coeffs.data() + p.coeffs.size());
  j["coeffs"] = coeffs;
  if (p.coeff_stderr.size() > 0) {
    std::vector<double> se(p.coeff_stderr.data(),
                           p.coeff_stderr.data() + p.coeff_stderr.size());
    j["coeff_stderr"] = se;
  }
  return j;
}

inline PolyInBasis poly_from_json(const Json& j) {
  PolyInBasis p;
  if (j.value("ordering", "") != "graded-lex")
    throw ConfigError("poly: unsupported ordering");
  p.measure = measure_from_json(j.at("measure"));
  const int d = j.at("d").get<int>();
  const int m = j.at("m").get<int>();
  p.indices = enumerate_indices(d, m);
  const auto coeffs = j.at("coeffs").get<std::vector<double>>();
  if (coeffs.size() != p.indices->size())
    throw ConfigError("poly: coefficient count does not match index set");
  p.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                               static_cast<Eigen::Index>(coeffs.size()));
  return p;
}

// Design CSV with header x1,...,xd; appends a y column when present.
inline std::string dataset_to_csv(const Dataset& data, bool design_only = false) {
  std::vector<std::string> header;
  for (int j = 1; j <= data.dimension(); ++j) header.push_back("x" + std::to_string(j));
  if (!design_only) header.push_back("y");
  CsvBuilder csv(header);
  std::vector<std::string> row(header.size());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.dimension(); ++j)
      row[static_cast<std::size_t>(j)] = format_double(data.x.x(i, j));
    if (!design_only)
      row[static_cast<std::size_t>(data.dimension())] = format_double(data.y(i));
    csv.append_row(row);
  }
  return csv.str();
}

inline Json dataset_sidecar(const Dataset& data) {
  Json j;
  j["schema"] = 1;
  j["measure"] = measure_to_json(data.measure);
  j["target"] = target_kind_name(data.target.kind());
  j["lipschitz_constant"] = data.target.lipschitz_constant();
  j["lipschitz_override"] = data.target.lipschitz_override();
  j["sigma"] = data.sigma;
  j["n"] = static_cast<std::int64_t>(data.n());
  j["seed"] = data.seed;
  return j;
}

// Basis evaluations at given points, one row per point (debug export).
inline std::string basis_eval_csv(const TensorBasis& basis,
                                  const Eigen::MatrixXd& points) {
  std::vector<std::string> header;
  for (std::size_t k = 0; k < basis.size(); ++k) header.push_back("p" + std::to_string(k));
  CsvBuilder csv(header);
  const Eigen::MatrixXd a = basis.eval_matrix(points);
  std::vector<std::string> row(basis.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < basis.size(); ++k)
      row[k] = format_double(a(i, static_cast<Eigen::Index>(k)));
    csv.append_row(row);
  }
  return csv.str();
}

inline Json packing_to_json(const PackingResult& r) {
  Json j;
  j["schema"] = 1;
  j["d"] = r.config.d;
  j["m"] = r.config.m;
  j["D0"] = r.d0;
  j["N"] = r.config.n_family;
  j["c0_hat"] = r.c0_hat;
  j["c0_hat_stderr"] = r.c0_hat_stderr;
  j["lambda"] = r.lambda;
  j["t"] = r.t;
  j["lipschitz_bound"] = r.lipschitz_bound;
  j["min_theta_dist"] = r.min_theta_dist;
  j["min_smoothed_dist"] = r.min_smoothed_dist;
  j["max_lip_quotient"] = r.max_lip_quotient;
  j["theta_separation_ok"] = r.theta_separation_ok;
  j["distance_ok"] = r.distance_ok;
  j["lipschitz_ok"] = r.lipschitz_ok;
  j["lipschitz_skipped"] = r.lipschitz_skipped;
  j["degenerate"] = r.degenerate;
  j["implied_epsilon"] = r.implied_epsilon;
  j["log_family_size"] = r.log_family_size;
  j["entropy_ok"] = r.entropy_ok;
  j["all_ok"] = r.all_ok;
  return j;
}

inline std::string packing_pairs_csv(const PackingResult& r) {
  CsvBuilder csv({"i", "j", "theta_dist", "smoothed_dist", "smoothed_stderr"});
  for (const auto& p : r.pairs)
    csv.append_row({std::to_string(p.i), std::to_string(p.j),
                    format_double(p.theta_dist), format_double(p.smoothed_dist),
                    format_double(p.smoothed_stderr)});
  return csv.str();
}

}  // namespace lipreg
