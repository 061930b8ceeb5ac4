#include "perhom/builtin_models.hpp"

#include "perhom/errors.hpp"

namespace perhom {

namespace {

TrigField wave1(double c, double cos_amp, double sin_amp) {
    return TrigField(c, {TrigTerm{{1}, cos_amp, sin_amp}});
}

LevyTripletModel one_dim(std::string name, TrigField b, TrigField c, JumpKernel jumps) {
    return LevyTripletModel(std::move(name), TorusGeometry({1.0}), DriftField({std::move(b)}),
                            DiffusionField(1, {std::move(c)}), std::move(jumps));
}

}  // namespace

std::vector<std::string> builtin_model_names() {
    return {"harmonic", "sine_drift", "const_levy", "asym_atom", "stable_like", "convolution",
            "bm",       "bm2",        "deterministic", "aniso2d", "bad_atom",  "bad_stable"};
}

LevyTripletModel builtin_model(const std::string& name) {
    if (name == "harmonic") return one_dim(name, 0.0, wave1(2.0, 0.0, 1.0), JumpKernel::none(1));
    if (name == "sine_drift") return one_dim(name, wave1(0.0, 0.0, 1.0), 1.0, JumpKernel::none(1));
    if (name == "const_levy") {
        return one_dim(name, 0.0, 1.0, JumpKernel::atoms(1, {Atom{1.0, {0.5}}, Atom{1.0, {-0.5}}}));
    }
    if (name == "asym_atom") {
        return one_dim(name, wave1(0.3, 0.0, 0.2), wave1(1.0, 0.5, 0.0),
                       JumpKernel::atoms(1, {Atom{wave1(1.0, 0.0, 0.5), {0.4}}}));
    }
    if (name == "stable_like") {
        StableLikeSpec spec;
        spec.alpha = wave1(1.2, 0.0, 0.3);
        spec.kappa = wave1(1.0, 0.5, 0.0);
        spec.skew = 0.25;
        spec.quadrature.r_cut = 2.0;
        return one_dim(name, wave1(0.0, 0.2, 0.0), 0.0, JumpKernel::stable_like(1, spec));
    }
    if (name == "convolution") {
        ConvolutionSpec spec;
        spec.lambda = wave1(1.0, 0.0, 0.5);
        spec.mu = wave1(1.0, 0.3, 0.0);
        spec.amplitude = 4.0;
        spec.scale = 0.2;
        spec.quadrature.r_cut = 0.8;
        return one_dim(name, 0.0, 0.05, JumpKernel::convolution(1, spec));
    }
    if (name == "bm") return one_dim(name, 0.0, 1.0, JumpKernel::none(1));
    if (name == "bm2") {
        return LevyTripletModel(name, TorusGeometry({1.0, 1.0}), DriftField({0.0, 0.0}),
                                DiffusionField(2, {1.0, 0.0, 1.0}), JumpKernel::none(2));
    }
    if (name == "deterministic") return one_dim(name, 0.5, 0.0, JumpKernel::none(1));
    if (name == "aniso2d") {
        TrigField b1(0.0, {TrigTerm{{1, 0}, 0.0, 0.2}});
        TrigField b2(0.1, {TrigTerm{{0, 1}, 0.1, 0.0}});
        TrigField c11(1.0, {TrigTerm{{0, 1}, 0.0, 0.3}});
        TrigField c12(0.2);
        TrigField c22(0.8, {TrigTerm{{1, 0}, 0.2, 0.0}});
        std::vector<Atom> atoms{Atom{TrigField(0.5, {TrigTerm{{0, 1}, 0.0, 0.2}}), {0.25, 0.0}},
                                Atom{TrigField(0.4), {0.0, -0.375}}};
        return LevyTripletModel(name, TorusGeometry({1.0, 1.0}), DriftField({b1, b2}),
                                DiffusionField(2, {c11, c12, c22}), JumpKernel::atoms(2, std::move(atoms)));
    }
    if (name == "bad_atom") return one_dim(name, 0.0, 1.0, JumpKernel::atoms(1, {Atom{-1.0, {0.25}}}));
    if (name == "bad_stable") {
        StableLikeSpec spec;
        spec.alpha = 2.5;
        spec.quadrature.r_cut = 2.0;
        return one_dim(name, 0.0, 0.0, JumpKernel::stable_like(1, spec));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown builtin model '" + name + "'");
}

}  // namespace perhom
