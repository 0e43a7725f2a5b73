#include "fcs/model_io.hpp"

#include <nlohmann/json.hpp>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j, int dim, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(name) + " must be a " + std::to_string(dim) + "-row array");
  }
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const auto& row = j.at(static_cast<size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw Error(ErrorKind::InvalidArgument, std::string(name) + " row has wrong length");
    }
    for (int k = 0; k < dim; ++k) {
      const auto& entry = row.at(static_cast<size_t>(k));
      if (!entry.is_array() || entry.size() != 2) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string(name) + " entries must be [re, im] pairs");
      }
      m(i, k) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  }
  return m;
}

nlohmann::json complex_to_json(Complex z) { return {z.real(), z.imag()}; }

Complex complex_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be an [re, im] pair");
  }
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

}  // namespace

nlohmann::json model_to_json(const QuantumModel& model) {
  return {{"dim", model.dim},
          {"U", matrix_to_json(model.U)},
          {"rho", matrix_to_json(model.rho)},
          {"Q", matrix_to_json(model.Q)}};
}

QuantumModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("dim") || !j.at("dim").is_number_integer()) {
    throw Error(ErrorKind::InvalidArgument, "model.dim must be an integer");
  }
  const int dim = j.at("dim").get<int>();
  if (dim <= 0) throw Error(ErrorKind::InvalidArgument, "model.dim must be positive");
  for (const char* key : {"U", "rho", "Q"}) {
    if (!j.contains(key)) {
      throw Error(ErrorKind::InvalidArgument, std::string("model.") + key + " is missing");
    }
  }
  return QuantumModel::create(matrix_from_json(j.at("U"), dim, "model.U"),
                              matrix_from_json(j.at("rho"), dim, "model.rho"),
                              matrix_from_json(j.at("Q"), dim, "model.Q"));
}

nlohmann::json two_circle_spec_to_json(const TwoCircleSpec& spec) {
  return {{"s_matrix",
           {{"r", complex_to_json(spec.s.r)},
            {"t", complex_to_json(spec.s.t)},
            {"r_prime", complex_to_json(spec.s.r_prime)},
            {"t_prime", complex_to_json(spec.s.t_prime)}}},
          {"circumference", spec.circumference},
          {"mu_l", spec.mu_l},
          {"mu_r", spec.mu_r},
          {"cutoff", spec.cutoff}};
}

TwoCircleSpec two_circle_spec_from_json(const nlohmann::json& j) {
  TwoCircleSpec spec;
  const bool has_transmission = j.contains("transmission");
  const bool has_s = j.contains("s_matrix");
  if (has_transmission == has_s) {
    throw Error(ErrorKind::InvalidArgument,
                "two_circle needs exactly one of 'transmission' or 's_matrix'");
  }
  if (has_transmission) {
    spec.s = ScatteringMatrix::from_transmission(j.at("transmission").get<double>());
  } else {
    const auto& s = j.at("s_matrix");
    spec.s.r = complex_from_json(s.at("r"), "s_matrix.r");
    spec.s.t = complex_from_json(s.at("t"), "s_matrix.t");
    spec.s.r_prime = complex_from_json(s.at("r_prime"), "s_matrix.r_prime");
    spec.s.t_prime = complex_from_json(s.at("t_prime"), "s_matrix.t_prime");
    spec.s.check();
  }
  for (const char* key : {"circumference", "mu_l", "mu_r", "cutoff"}) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw Error(ErrorKind::InvalidArgument,
                  std::string("two_circle.") + key + " must be a number");
    }
  }
  spec.circumference = j.at("circumference").get<double>();
  spec.mu_l = j.at("mu_l").get<double>();
  spec.mu_r = j.at("mu_r").get<double>();
  spec.cutoff = j.at("cutoff").get<double>();
  return spec;
}

}  // namespace fcs
