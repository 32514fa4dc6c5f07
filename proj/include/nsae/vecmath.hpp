#pragma once

#include "error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nsae {

// One d-dimensional sample (a flattened image or any embedding).
using Vector = std::vector<double>;
using Dataset = std::vector<Vector>;

inline constexpr double kZeroNormEpsilon = 1e-12;

inline bool all_finite(std::span<const double> v) noexcept
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline void require_finite(std::span<const double> v, const std::string& what)
{
    if (!all_finite(v))
        fail(ErrorCode::NonFiniteValue, what + " contains NaN or Inf");
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        fail(ErrorCode::DimensionMismatch,
             "dot of dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

inline double norm(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

namespace detail {

inline double cosine_from_parts(double ab, double na, double nb) noexcept
{
    return std::clamp(ab / (na * nb), -1.0, 1.0);
}

} // namespace detail

inline double cosine_score(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        fail(ErrorCode::DimensionMismatch,
             "cosine of dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    const double na = norm(a);
    const double nb = norm(b);
    if (na < kZeroNormEpsilon || nb < kZeroNormEpsilon)
        fail(ErrorCode::ZeroVector, "cosine_score operand has zero norm");
    return detail::cosine_from_parts(dot(a, b), na, nb);
}

inline Vector l2_normalize(std::span<const double> a)
{
    const double n = norm(a);
    if (n < kZeroNormEpsilon)
        fail(ErrorCode::ZeroVector, "cannot normalize a zero vector");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] / n;
    return out;
}

// Dense symmetric n x n matrix of cosine scores, row-major.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n) : n_(n), scores_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return scores_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return scores_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept
    {
        return {scores_.data() + i * n_, n_};
    }

private:
    std::size_t n_ = 0;
    std::vector<double> scores_;
};

// Upper triangle computed per row (rows may be split across workers) and
// mirrored. Each entry uses the same accumulation as cosine_score, so the
// result is identical for any worker count.
inline SimilarityMatrix pairwise_cosine(const Dataset& data, unsigned workers = 1)
{
    const std::size_t n = data.size();
    if (n == 0)
        return SimilarityMatrix{};
    const std::size_t dim = data[0].size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (data[i].size() != dim)
            fail(ErrorCode::DimensionMismatch,
                 "vector " + std::to_string(i) + " has dim " + std::to_string(data[i].size()) +
                     ", expected " + std::to_string(dim));
        norms[i] = norm(data[i]);
        if (norms[i] < kZeroNormEpsilon)
            fail(ErrorCode::ZeroVector, "vector " + std::to_string(i) + " has zero norm");
    }

    SimilarityMatrix sim(n);
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j)
            sim(i, j) = detail::cosine_from_parts(dot(data[i], data[j]), norms[i], norms[j]);
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            sim(i, j) = sim(j, i);
    return sim;
}

} // namespace nsae
