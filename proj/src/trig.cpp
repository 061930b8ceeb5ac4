#include "perhom/trig.hpp"

#include <cmath>
#include <numbers>

namespace perhom {

TrigField::TrigField(double constant, std::vector<TrigTerm> terms)
    : constant_(constant), terms_(std::move(terms)) {}

double TrigField::eval(const double* x, const std::vector<double>& periods) const noexcept {
    double v = constant_;
    for (const auto& term : terms_) {
        double phase = 0.0;
        for (std::size_t k = 0; k < term.wave.size(); ++k) {
            if (term.wave[k] != 0) phase += term.wave[k] * (x[k] / periods[k]);
        }
        phase *= 2.0 * std::numbers::pi;
        if (term.cos_amp != 0.0) v += term.cos_amp * std::cos(phase);
        if (term.sin_amp != 0.0) v += term.sin_amp * std::sin(phase);
    }
    return v;
}

double TrigField::upper_bound() const noexcept {
    double b = constant_;
    for (const auto& t : terms_) b += std::abs(t.cos_amp) + std::abs(t.sin_amp);
    return b;
}

double TrigField::lower_bound() const noexcept {
    double b = constant_;
    for (const auto& t : terms_) b -= std::abs(t.cos_amp) + std::abs(t.sin_amp);
    return b;
}

}  // namespace perhom
