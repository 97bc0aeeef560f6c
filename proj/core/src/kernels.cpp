#include "layerpot/kernels.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/qmc.hpp"

#include <bit>
#include <cmath>

namespace layerpot::kernels {

namespace {

void check_nonzero(const Vec3& z) {
  if (z.isZero(0.0)) throw DomainError("kernel evaluated at z = 0");
}

}  // namespace

ConstKernel::ConstKernel(const Mat3& a0) : a0_(a0), a0s_(sym_part(a0)) {
  det_ = a0s_.determinant();
  if (!(det_ > 0)) throw DomainError("constant matrix has a non positive definite symmetric part");
  inv_ = a0s_.inverse();
  scale_ = kInv4Pi / std::sqrt(det_);
}

double ConstKernel::theta(const Vec3& z) const {
  check_nonzero(z);
  const double q = (inv_ * z).dot(z);
  return -scale_ / (kN - 1) / std::sqrt(q);
}

Vec3 ConstKernel::grad(const Vec3& z) const {
  const Vec3 y = inv_ * z;
  const double q = y.dot(z);
  return y * (scale_ / (q * std::sqrt(q)));
}

double theta(const Vec3& z, const Mat3& a0) { return ConstKernel(a0).theta(z); }

Vec3 grad_theta(const Vec3& z, const Mat3& a0) {
  check_nonzero(z);
  return ConstKernel(a0).grad(z);
}

Vec3 riesz_kernel(const Vec3& z) {
  check_nonzero(z);
  const double q = z.dot(z);
  return z * (1.0 / (q * std::sqrt(q)));
}

Vec3 riesz_over_4pi(const Vec3& z) {
  const double q = z.dot(z);
  return z * (kInv4Pi / (q * std::sqrt(q)));
}

std::size_t FrozenKernel::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(k.bin)));
  for (double c : k.x) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

FrozenKernel::FrozenKernel(std::shared_ptr<const field::MatrixField> a, field::AveragingOptions opts)
    : field_(std::move(a)), opts_(opts), constant_(field_->is_constant()),
      shards_(std::make_unique<std::array<Shard, kShards>>()) {
  if (constant_) const_kernel_ = std::make_unique<ConstKernel>((*field_)(Vec3::Zero()));
}

double FrozenKernel::bin_radius(double r) { return std::exp2(std::lround(64.0 * std::log2(r)) / 64.0); }

const ConstKernel& FrozenKernel::frozen_at(const Vec3& x, double r) const {
  if (constant_) return *const_kernel_;
  const int bin = static_cast<int>(std::lround(64.0 * std::log2(r)));
  const Key key{{x[0], x[1], x[2]}, bin};
  Shard& shard = (*shards_)[KeyHash{}(key) % kShards];
  {
    std::lock_guard lock(shard.mu);
    if (auto it = shard.map.find(key); it != shard.map.end()) return *it->second;
  }
  auto fresh = std::make_unique<ConstKernel>(field::ball_average(*field_, x, std::exp2(bin / 64.0), opts_));
  std::lock_guard lock(shard.mu);
  auto [it, inserted] = shard.map.emplace(key, std::move(fresh));
  return *it->second;
}

Vec3 FrozenKernel::operator()(const Vec3& x, const Vec3& y) const {
  const Vec3 z = x - y;
  if (constant_) return const_kernel_->grad(z);
  return frozen_at(x, 0.5 * z.norm()).grad(z);
}

std::size_t FrozenKernel::cache_size() const {
  std::size_t n = 0;
  for (auto& s : *shards_) {
    std::lock_guard lock(s.mu);
    n += s.map.size();
  }
  return n;
}

void FrozenKernel::clear_cache() const {
  for (auto& s : *shards_) {
    std::lock_guard lock(s.mu);
    s.map.clear();
  }
}

double k1_budget(const dini::OscillationModulus& theta, double r, double R, double c) {
  if (!(r > 0) || !(r < R)) throw DomainError("k1_budget needs 0 < r < R");
  const auto tb = dini::tau_budgets(theta, r, R);
  return c * tb.tau / std::pow(r, kN) + c * tb.tau_hat / std::pow(R, kN);
}

Vec3 k2_diff(const field::MatrixField& a, const Vec3& x, double r, double delta, const Vec3& z,
             const field::AveragingOptions& opts) {
  if (!(delta > 0) || !(delta < r)) throw DomainError("k2_diff needs 0 < delta < r");
  check_nonzero(z);
  const ConstKernel outer(field::ball_average(a, x, 0.5 * r, opts));
  const ConstKernel inner(field::ball_average(a, x, 0.5 * delta, opts));
  return outer.grad(z) - inner.grad(z);
}

Vec3 k3_diff(const field::MatrixField& a, const Vec3& x, double delta, const Vec3& z,
             const field::AveragingOptions& opts) {
  if (!(delta > 0)) throw DomainError("k3_diff needs delta > 0");
  check_nonzero(z);
  const ConstKernel k(field::ball_average(a, x, 0.5 * delta, opts));
  return k.grad(z) - riesz_over_4pi(z);
}

KernelSpec::KernelSpec(KernelVariant k) : k_(std::move(k)) {
  if (const auto* c = std::get_if<ConstGrad>(&k_)) ck_ = std::make_shared<ConstKernel>(c->a0);
  if (const auto* c = std::get_if<ConstMinusRiesz>(&k_)) ck_ = std::make_shared<ConstKernel>(c->a0);
  if (const auto* f = std::get_if<Frozen>(&k_); f && !f->kernel) throw DomainError("frozen kernel is null");
  if (const auto* f = std::get_if<FrozenMinusRiesz>(&k_); f && !f->kernel) throw DomainError("frozen kernel is null");
}

std::string KernelSpec::name() const {
  switch (k_.index()) {
    case 0: return "riesz";
    case 1: return "const";
    case 2: return "frozen";
    case 3: return "frozen-minus-riesz";
    case 4: return "const-minus-riesz";
    default: return "modulus:" + dini::to_string(std::get<ModulusKernel>(k_).theta.family());
  }
}

Vec3 KernelSpec::operator()(const Vec3& x, const Vec3& y) const {
  const Vec3 z = x - y;
  switch (k_.index()) {
    case 0: {
      const double q = z.dot(z);
      return z * (std::get<Riesz>(k_).scale / (q * std::sqrt(q)));
    }
    case 1: return ck_->grad(z);
    case 2: return (*std::get<Frozen>(k_).kernel)(x, y);
    case 3: return (*std::get<FrozenMinusRiesz>(k_).kernel)(x, y) - riesz_over_4pi(z);
    case 4: return ck_->grad(z) - riesz_over_4pi(z);
    default: {
      const auto& m = std::get<ModulusKernel>(k_);
      const double r = z.norm();
      return z * (m.theta(r) / (std::pow(r, m.d) * r));
    }
  }
}

}  // namespace layerpot::kernels
