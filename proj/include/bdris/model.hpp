#pragma once

// BD-RIS reflection model: reactance networks, the Cayley map to scattering
// matrices, block-diagonal assembly and TRP vectorization.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bdris/common.hpp"

namespace bdris {

struct BdRisConfig {
  int n_elements = 4;
  int n_groups = 2;
  double reference_impedance = 50.0;  // ohms

  int group_size() const { return n_groups > 0 ? n_elements / n_groups : 0; }

  /// Length of a TRP / cascaded channel vector: N0*N + 1.
  int trp_length() const { return group_size() * n_elements + 1; }

  void validate() const {
    detail::require(n_elements > 0, "n_elements must be positive");
    detail::require(n_groups > 0, "n_groups must be positive");
    detail::require(n_elements % n_groups == 0,
                    "n_groups (" + std::to_string(n_groups) + ") must divide n_elements (" +
                        std::to_string(n_elements) + ")");
    detail::require(reference_impedance > 0.0, "reference_impedance must be positive");
  }

  static BdRisConfig from_group_size(int n_elements, int group_size, double z0 = 50.0) {
    detail::require(group_size > 0, "group_size must be positive");
    detail::require(n_elements % group_size == 0, "group_size must divide n_elements");
    BdRisConfig cfg{n_elements, n_elements / group_size, z0};
    cfg.validate();
    return cfg;
  }
};

/// K real symmetric N0 x N0 reactance blocks, in ohms.
struct ReactanceMatrix {
  std::vector<RMatrix> blocks;
};

/// Block-diagonal reflection matrix stored as its K diagonal blocks.
class ScatteringMatrix {
 public:
  ScatteringMatrix() = default;
  explicit ScatteringMatrix(std::vector<CMatrix> blocks) : blocks_(std::move(blocks)) {}

  const std::vector<CMatrix>& blocks() const { return blocks_; }
  int n_groups() const { return static_cast<int>(blocks_.size()); }
  int group_size() const { return blocks_.empty() ? 0 : static_cast<int>(blocks_.front().rows()); }
  int n_elements() const { return n_groups() * group_size(); }

  /// Dense N x N form with zeros outside the diagonal blocks.
  CMatrix dense() const {
    const int n0 = group_size();
    CMatrix out = CMatrix::Zero(n_elements(), n_elements());
    for (int k = 0; k < n_groups(); ++k) out.block(k * n0, k * n0, n0, n0) = blocks_[k];
    return out;
  }

 private:
  std::vector<CMatrix> blocks_;
};

/// v̄ = [1; vec(Θ_1*); ...; vec(Θ_K*)], column-major vec.
struct TrpVector {
  CVector entries;

  Eigen::Index size() const { return entries.size(); }
};

struct ScatteringReport {
  double max_unitarity_residual = 0.0;
  double max_symmetry_residual = 0.0;
  bool pass = false;
};

inline constexpr double kScatteringTolerance = 1e-10;

/// Θ = (jX + z0 I)^{-1} (jX - z0 I). Unitary and symmetric for symmetric X.
inline CMatrix cayley_transform(const RMatrix& block, double z0) {
  detail::require(block.rows() == block.cols(), "reactance block must be square");
  detail::require(z0 > 0.0, "reference impedance must be positive");
  detail::require((block - block.transpose()).norm() <= 1e-12 * block.norm(),
                  "reactance block must be symmetric");
  const auto n = block.rows();
  const CMatrix jx = kJ * block.cast<cplx>();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix lhs = jx + z0 * id;
  const CMatrix rhs = jx - z0 * id;
  CMatrix theta = lhs.partialPivLu().solve(rhs);
  const double residual = (lhs * theta - rhs).norm() / rhs.norm();
  if (!(residual <= 1e-8)) {
    throw NumericalFailure("cayley_transform: inversion residual " + std::to_string(residual));
  }
  return theta;
}

inline ScatteringMatrix assemble_reflection(std::vector<CMatrix> blocks) {
  detail::require(!blocks.empty(), "assemble_reflection: no blocks");
  const auto n0 = blocks.front().rows();
  for (const auto& b : blocks) {
    detail::require(b.rows() == n0 && b.cols() == n0,
                    "assemble_reflection: blocks must all be " + std::to_string(n0) + "x" +
                        std::to_string(n0));
  }
  return ScatteringMatrix(std::move(blocks));
}

/// Entries i.i.d. N(0, z0^2), symmetrized as (A + A^T) / 2.
inline ReactanceMatrix random_reactance(const BdRisConfig& config, Rng& rng) {
  config.validate();
  const int n0 = config.group_size();
  std::normal_distribution<double> normal(0.0, config.reference_impedance);
  ReactanceMatrix out;
  out.blocks.reserve(config.n_groups);
  for (int k = 0; k < config.n_groups; ++k) {
    RMatrix a(n0, n0);
    for (int c = 0; c < n0; ++c)
      for (int r = 0; r < n0; ++r) a(r, c) = normal(rng);
    out.blocks.push_back((a + a.transpose()) / 2.0);
  }
  return out;
}

inline ScatteringMatrix scattering_from_reactance(const ReactanceMatrix& x, double z0) {
  std::vector<CMatrix> blocks;
  blocks.reserve(x.blocks.size());
  for (const auto& b : x.blocks) blocks.push_back(cayley_transform(b, z0));
  return assemble_reflection(std::move(blocks));
}

inline TrpVector vectorize_trp(const ScatteringMatrix& theta) {
  const int n0 = theta.group_size();
  TrpVector v{CVector(theta.n_groups() * n0 * n0 + 1)};
  v.entries(0) = cplx(1.0, 0.0);
  Eigen::Index i = 1;
  for (const auto& block : theta.blocks())
    for (Eigen::Index c = 0; c < n0; ++c)
      for (Eigen::Index r = 0; r < n0; ++r) v.entries(i++) = std::conj(block(r, c));
  return v;
}

/// Inverse of vectorize_trp given the group size.
inline ScatteringMatrix unvectorize_trp(const TrpVector& v, int group_size) {
  detail::require(group_size > 0, "group_size must be positive");
  const auto per_block = static_cast<Eigen::Index>(group_size) * group_size;
  detail::require(v.size() >= 1 && (v.size() - 1) % per_block == 0,
                  "TRP length does not match group size");
  const auto k = (v.size() - 1) / per_block;
  std::vector<CMatrix> blocks;
  Eigen::Index i = 1;
  for (Eigen::Index g = 0; g < k; ++g) {
    CMatrix b(group_size, group_size);
    for (Eigen::Index c = 0; c < group_size; ++c)
      for (Eigen::Index r = 0; r < group_size; ++r) b(r, c) = std::conj(v.entries(i++));
    blocks.push_back(std::move(b));
  }
  return assemble_reflection(std::move(blocks));
}

/// Frobenius residuals ||Θ_k^H Θ_k - I|| and ||Θ_k - Θ_k^T||, maximized over blocks.
inline ScatteringReport validate_scattering(const ScatteringMatrix& theta,
                                            double tol = kScatteringTolerance) {
  ScatteringReport rep;
  for (const auto& b : theta.blocks()) {
    const auto n = b.rows();
    rep.max_unitarity_residual = std::max(
        rep.max_unitarity_residual, (b.adjoint() * b - CMatrix::Identity(n, n)).norm());
    rep.max_symmetry_residual =
        std::max(rep.max_symmetry_residual, (b - b.transpose()).norm());
  }
  rep.pass = rep.max_unitarity_residual <= tol && rep.max_symmetry_residual <= tol;
  return rep;
}

/// One candidate TRP: random reactance -> Cayley -> vectorize.
inline TrpVector random_trp(const BdRisConfig& config, Rng& rng) {
  return vectorize_trp(scattering_from_reactance(random_reactance(config, rng),
                                                 config.reference_impedance));
}

}  // namespace bdris
