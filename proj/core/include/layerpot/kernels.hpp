#pragma once

// Constant-coefficient fundamental solution, Riesz kernel, frozen-coefficient kernel
// and the difference kernels used by the perturbation argument. Ambient R^3, n = 2.

#include "layerpot/dini.hpp"
#include "layerpot/linalg.hpp"
#include "layerpot/matrixfield.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <variant>

namespace layerpot::kernels {

inline constexpr double kInv4Pi = 1.0 / kSphereArea;

/// Derived data of a constant matrix A0: only the symmetric part enters Theta.
class ConstKernel {
 public:
  explicit ConstKernel(const Mat3& a0);

  const Mat3& a0() const { return a0_; }
  const Mat3& a0_sym() const { return a0s_; }
  const Mat3& a0_sym_inv() const { return inv_; }
  double det_sym() const { return det_; }

  /// Theta(z; A0) = -1/((n-1) w_n sqrt(det A_s)) <A_s^{-1} z, z>^{-(n-1)/2}.
  double theta(const Vec3& z) const;
  /// grad Theta(z; A0) = w_n^{-1} det(A_s)^{-1/2} A_s^{-1} z / <A_s^{-1} z, z>^{3/2}.
  Vec3 grad(const Vec3& z) const;

 private:
  Mat3 a0_;
  Mat3 a0s_;
  Mat3 inv_;
  double det_;
  double scale_;  // w_n^{-1} det^{-1/2}
};

/// Throws DomainError for z = 0.
double theta(const Vec3& z, const Mat3& a0);
Vec3 grad_theta(const Vec3& z, const Mat3& a0);

/// z / |z|^{n+1}.
Vec3 riesz_kernel(const Vec3& z);
/// riesz_kernel(z) / (4 pi), evaluated with the same operation order as grad_theta(z, Id).
Vec3 riesz_over_4pi(const Vec3& z);

/// grad Theta(x - y; A_{x, |x-y|/2}) with the matrix average taken over B(x, |x-y|/2).
///
/// Averages are memoized per (x, radius bin); the bin is round(64 log2 r) and the
/// average is always computed at the bin radius 2^{bin/64}, so a cache hit and a fresh
/// computation give the same bits. Thread safe.
class FrozenKernel {
 public:
  FrozenKernel(std::shared_ptr<const field::MatrixField> a, field::AveragingOptions opts);

  const field::MatrixField& field() const { return *field_; }
  const field::AveragingOptions& averaging() const { return opts_; }

  Vec3 operator()(const Vec3& x, const Vec3& y) const;

  /// Cached constant kernel for the ball B(x, r) (r is binned).
  const ConstKernel& frozen_at(const Vec3& x, double r) const;

  /// Bin radius used for r.
  static double bin_radius(double r);
  std::size_t cache_size() const;
  void clear_cache() const;

 private:
  struct Key {
    std::array<double, 3> x;
    int bin;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  static constexpr std::size_t kShards = 64;
  struct Shard {
    std::mutex mu;
    std::unordered_map<Key, std::unique_ptr<ConstKernel>, KeyHash> map;
  };

  std::shared_ptr<const field::MatrixField> field_;
  field::AveragingOptions opts_;
  bool constant_;
  std::unique_ptr<ConstKernel> const_kernel_;
  mutable std::unique_ptr<std::array<Shard, kShards>> shards_;
};

/// C tau(r)/r^n + C tauhat(R)/R^n. Throws DomainError unless 0 < r < R.
double k1_budget(const dini::OscillationModulus& theta, double r, double R, double c = 1.0);

/// grad Theta(z; A_{x,r/2}) - grad Theta(z; A_{x,delta/2}). Requires 0 < delta < r.
Vec3 k2_diff(const field::MatrixField& a, const Vec3& x, double r, double delta, const Vec3& z,
             const field::AveragingOptions& opts);

/// grad Theta(z; A_{x,delta/2}) - riesz_kernel(z)/(4 pi), for a field already normalized
/// so that the symmetric part of its average over the reference region is Id.
Vec3 k3_diff(const field::MatrixField& a, const Vec3& x, double delta, const Vec3& z,
             const field::AveragingOptions& opts);

/// Kernels that can be assembled into operators on a discrete measure.
struct Riesz {
  double scale = 1.0;  // K = scale * z/|z|^3
};
struct ConstGrad {
  Mat3 a0;
};
struct Frozen {
  std::shared_ptr<const FrozenKernel> kernel;
};
/// Frozen kernel minus riesz/(4 pi).
struct FrozenMinusRiesz {
  std::shared_ptr<const FrozenKernel> kernel;
};
/// grad Theta(.; A0) minus riesz/(4 pi).
struct ConstMinusRiesz {
  Mat3 a0;
};
/// theta(|z|)/|z|^d * z/|z|: an odd (theta, d)-kernel attaining its bound in norm.
struct ModulusKernel {
  dini::OscillationModulus theta;
  double d = 2.0;
};

using KernelVariant = std::variant<Riesz, ConstGrad, Frozen, FrozenMinusRiesz, ConstMinusRiesz, ModulusKernel>;

class KernelSpec {
 public:
  KernelSpec(KernelVariant k);  // NOLINT(google-explicit-constructor)

  static KernelSpec riesz(double scale = 1.0) { return {Riesz{scale}}; }
  static KernelSpec const_grad(const Mat3& a0) { return {ConstGrad{a0}}; }
  static KernelSpec frozen(std::shared_ptr<const FrozenKernel> k) { return {Frozen{std::move(k)}}; }
  static KernelSpec frozen_minus_riesz(std::shared_ptr<const FrozenKernel> k) {
    return {FrozenMinusRiesz{std::move(k)}};
  }

  const KernelVariant& variant() const { return k_; }
  std::string name() const;

  /// K(x, y) for x != y.
  Vec3 operator()(const Vec3& x, const Vec3& y) const;

 private:
  KernelVariant k_;
  std::shared_ptr<const ConstKernel> ck_;
};

}  // namespace layerpot::kernels
