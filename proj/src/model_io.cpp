#include "perhom/model_io.hpp"

#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"

#include <fstream>
#include <sstream>

namespace perhom {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::Parse, what); }

double number(const json& j, const char* key) {
    if (!j.contains(key)) parse_fail(std::string("missing key '") + key + "'");
    if (!j.at(key).is_number()) parse_fail(std::string("key '") + key + "' must be a number");
    return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? number(j, key) : fallback;
}

int integer_or(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) parse_fail(std::string("key '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::vector<double> vector_of(const json& j, const char* what) {
    if (!j.is_array()) parse_fail(std::string(what) + " must be an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) parse_fail(std::string(what) + " must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

TrigField field_from_json(const json& j) {
    if (j.is_number()) return TrigField(j.get<double>());
    if (!j.is_object()) parse_fail("field must be a number or an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "const" && key != "terms") parse_fail("unknown field key '" + key + "'");
    }
    const double c = number_or(j, "const", 0.0);
    std::vector<TrigTerm> terms;
    if (j.contains("terms")) {
        if (!j.at("terms").is_array()) parse_fail("field terms must be an array");
        for (const auto& t : j.at("terms")) {
            if (!t.is_object() || !t.contains("k")) parse_fail("trig term needs a wave vector 'k'");
            TrigTerm term;
            for (const auto& k : t.at("k")) {
                if (!k.is_number_integer()) parse_fail("wave vector entries must be integers");
                term.wave.push_back(k.get<int>());
            }
            term.cos_amp = number_or(t, "cos", 0.0);
            term.sin_amp = number_or(t, "sin", 0.0);
            terms.push_back(std::move(term));
        }
    }
    return TrigField(c, std::move(terms));
}

json field_to_json(const TrigField& f) {
    if (f.is_constant()) return f.constant();
    json terms = json::array();
    for (const auto& t : f.terms()) {
        json jt;
        jt["k"] = t.wave;
        jt["cos"] = t.cos_amp;
        jt["sin"] = t.sin_amp;
        terms.push_back(std::move(jt));
    }
    return json{{"const", f.constant()}, {"terms", std::move(terms)}};
}

RadialQuadrature quadrature_from_json(const json& j) {
    RadialQuadrature q;
    q.r_min = number_or(j, "r_min", q.r_min);
    q.r_cut = number_or(j, "r_cut", q.r_cut);
    q.radial_nodes = integer_or(j, "radial_nodes", q.radial_nodes);
    q.angular_nodes = integer_or(j, "angular_nodes", q.angular_nodes);
    return q;
}

void quadrature_to_json(const RadialQuadrature& q, json& j) {
    j["r_min"] = q.r_min;
    j["r_cut"] = q.r_cut;
    j["radial_nodes"] = q.radial_nodes;
    j["angular_nodes"] = q.angular_nodes;
}

JumpKernel jumps_from_json(const json& j, int dim) {
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
        parse_fail("jumps must be an object with a 'family' string");
    }
    const auto family = j.at("family").get<std::string>();
    if (family == "none") return JumpKernel::none(dim);
    if (family == "atoms") {
        if (!j.contains("atoms") || !j.at("atoms").is_array()) parse_fail("atoms family needs an 'atoms' array");
        std::vector<Atom> atoms;
        for (const auto& a : j.at("atoms")) {
            if (!a.is_object() || !a.contains("rate") || !a.contains("y")) parse_fail("atom needs 'rate' and 'y'");
            atoms.push_back(Atom{field_from_json(a.at("rate")), vector_of(a.at("y"), "atom displacement")});
        }
        return JumpKernel::atoms(dim, std::move(atoms));
    }
    if (family == "convolution") {
        ConvolutionSpec spec;
        if (j.contains("lambda")) spec.lambda = field_from_json(j.at("lambda"));
        if (j.contains("mu")) spec.mu = field_from_json(j.at("mu"));
        spec.amplitude = number_or(j, "amplitude", spec.amplitude);
        spec.scale = number_or(j, "scale", spec.scale);
        spec.quadrature = quadrature_from_json(j);
        return JumpKernel::convolution(dim, std::move(spec));
    }
    if (family == "stable_like") {
        StableLikeSpec spec;
        if (j.contains("alpha")) spec.alpha = field_from_json(j.at("alpha"));
        if (j.contains("kappa")) spec.kappa = field_from_json(j.at("kappa"));
        spec.skew = number_or(j, "skew", spec.skew);
        spec.quadrature = quadrature_from_json(j);
        spec.quadrature.r_cut = number_or(j, "r_cut", 2.0);
        return JumpKernel::stable_like(dim, std::move(spec));
    }
    parse_fail("unknown jump family '" + family + "'");
}

json jumps_to_json(const JumpKernel& k) {
    json j;
    j["family"] = to_string(k.family());
    if (const auto* atoms = std::get_if<std::vector<Atom>>(&k.spec())) {
        json arr = json::array();
        for (const auto& a : *atoms) arr.push_back(json{{"rate", field_to_json(a.rate)}, {"y", a.displacement}});
        j["atoms"] = std::move(arr);
    } else if (const auto* conv = std::get_if<ConvolutionSpec>(&k.spec())) {
        j["lambda"] = field_to_json(conv->lambda);
        j["mu"] = field_to_json(conv->mu);
        j["amplitude"] = conv->amplitude;
        j["scale"] = conv->scale;
        quadrature_to_json(conv->quadrature, j);
    } else if (const auto* st = std::get_if<StableLikeSpec>(&k.spec())) {
        j["alpha"] = field_to_json(st->alpha);
        j["kappa"] = field_to_json(st->kappa);
        j["skew"] = st->skew;
        quadrature_to_json(st->quadrature, j);
    }
    return j;
}

}  // namespace

LevyTripletModel model_from_json(const json& doc) {
    try {
        if (!doc.is_object()) parse_fail("model document must be an object");
        if (!doc.contains("periods")) parse_fail("missing key 'periods'");
        auto periods = vector_of(doc.at("periods"), "periods");
        TorusGeometry geometry(periods);
        const int d = geometry.dim();

        if (!doc.contains("drift") || !doc.at("drift").is_array() ||
            static_cast<int>(doc.at("drift").size()) != d) {
            parse_fail("'drift' must list one field per dimension");
        }
        std::vector<TrigField> drift;
        for (const auto& f : doc.at("drift")) drift.push_back(field_from_json(f));

        if (!doc.contains("diffusion") || !doc.at("diffusion").is_array() ||
            static_cast<int>(doc.at("diffusion").size()) != d) {
            parse_fail("'diffusion' must be a d x d array");
        }
        const auto& cj = doc.at("diffusion");
        std::vector<TrigField> upper;
        for (int i = 0; i < d; ++i) {
            if (!cj[static_cast<std::size_t>(i)].is_array() || static_cast<int>(cj[static_cast<std::size_t>(i)].size()) != d) {
                parse_fail("'diffusion' must be a d x d array");
            }
            for (int k = i; k < d; ++k) {
                auto cik = field_from_json(cj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
                auto cki = field_from_json(cj[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
                if (!(cik == cki)) parse_fail("'diffusion' must be symmetric");
                upper.push_back(std::move(cik));
            }
        }
        JumpKernel jumps = doc.contains("jumps") ? jumps_from_json(doc.at("jumps"), d) : JumpKernel::none(d);

        const std::string name = doc.contains("name") && doc.at("name").is_string() ? doc.at("name").get<std::string>() : "";
        LevyTripletModel model(name, geometry, DriftField(std::move(drift)), DiffusionField(d, std::move(upper)),
                               std::move(jumps));
        if (doc.contains("symmetric")) {
            if (!doc.at("symmetric").is_boolean()) parse_fail("'symmetric' must be a boolean");
            model.set_declared_symmetric(doc.at("symmetric").get<bool>());
        }
        if (doc.contains("second_moment_bound")) model.set_second_moment_bound(number(doc, "second_moment_bound"));
        return model;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse) throw;
        throw Error(ErrorCode::Parse, e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

json model_to_json(const LevyTripletModel& model) {
    const int d = model.dim();
    json doc;
    doc["name"] = model.name();
    doc["periods"] = model.geometry().periods();
    json drift = json::array();
    for (const auto& f : model.drift().components()) drift.push_back(field_to_json(f));
    doc["drift"] = std::move(drift);
    json diff = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int k = 0; k < d; ++k) row.push_back(field_to_json(model.diffusion().entry(i, k)));
        diff.push_back(std::move(row));
    }
    doc["diffusion"] = std::move(diff);
    doc["jumps"] = jumps_to_json(model.jumps());
    if (model.declared_symmetric().has_value()) doc["symmetric"] = *model.declared_symmetric();
    doc["second_moment_bound"] = model.second_moment_bound();
    return doc;
}

LevyTripletModel parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    return model_from_json(doc);
}

std::string serialize_model(const LevyTripletModel& model) { return model_to_json(model).dump(2) + "\n"; }

LevyTripletModel load_model(const std::string& path) {
    constexpr std::string_view prefix = "builtin:";
    if (path.rfind(prefix, 0) == 0) return builtin_model(path.substr(prefix.size()));
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, "cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::uint64_t model_hash(const LevyTripletModel& model) {
    const std::string text = model_to_json(model).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace perhom
