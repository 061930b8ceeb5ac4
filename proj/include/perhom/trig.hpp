#pragma once

#include "perhom/torus.hpp"

#include <vector>

namespace perhom {

/// One Fourier mode a*cos(2 pi <k, x/tau>) + b*sin(2 pi <k, x/tau>).
struct TrigTerm {
    std::vector<int> wave;
    double cos_amp = 0.0;
    double sin_amp = 0.0;

    bool operator==(const TrigTerm&) const = default;
};

/// Real trigonometric polynomial on the torus; the builtin coefficient family.
class TrigField {
public:
    TrigField() = default;
    TrigField(double constant) : constant_(constant) {}  // NOLINT: numbers are constant fields
    TrigField(double constant, std::vector<TrigTerm> terms);

    /// x must already be wrapped; periods come from the owning geometry.
    double eval(const double* x, const std::vector<double>& periods) const noexcept;

    double constant() const noexcept { return constant_; }
    const std::vector<TrigTerm>& terms() const noexcept { return terms_; }
    bool is_constant() const noexcept { return terms_.empty(); }

    /// Analytic bounds: constant -/+ sum of |amplitudes|.
    double upper_bound() const noexcept;
    double lower_bound() const noexcept;

    bool operator==(const TrigField&) const = default;

private:
    double constant_ = 0.0;
    std::vector<TrigTerm> terms_;
};

}  // namespace perhom
