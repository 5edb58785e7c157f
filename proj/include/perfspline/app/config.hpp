#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfspline/error.hpp"
#include "perfspline/extremal.hpp"
#include "perfspline/kernels.hpp"
#include "perfspline/refine.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline::app {

using nlohmann::json;

struct HarmonicTerm {
    std::size_t frequency = 0;
    double cos_amplitude = 0.0;
    double sin_amplitude = 0.0;
};

/// The function f: either explicit harmonics or a named demo.
struct FunctionSpec {
    enum class Kind { harmonic, builtin };
    Kind kind = Kind::harmonic;
    std::vector<HarmonicTerm> terms;
    std::string builtin;
};

struct NodeSpec {
    double x = 0.0;
    WeightKind weight = WeightKind::box;
    double half_width = 0.0;
};

struct Tolerances {
    double residual = 1e-8;
    double mean_zero = 1e-10;
    double extremal = 1e-6;
    double zero = 1e-9;
};

struct RunConfig {
    int order = 2;
    int m = 1;
    std::vector<NodeSpec> nodes;
    FunctionSpec function;
    double smoothing = 1e-3;
    std::size_t grid = 2048;
    std::size_t bandwidth = 4096;
    std::size_t refine_bandwidth = 0; ///< 0 selects the order/weight dependent default
    Tolerances tolerances;
    std::optional<std::string> out_spline;
    std::optional<std::string> out_report;

    [[nodiscard]] std::size_t effective_refine_bandwidth() const {
        if (refine_bandwidth != 0) return refine_bandwidth;
        const bool points = std::any_of(nodes.begin(), nodes.end(),
                                        [](const NodeSpec& n) { return n.weight == WeightKind::delta; });
        return default_refine_bandwidth(order, points);
    }
};

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"sin", "cos", "sin+cos", "sin+half", "sin3", "mixed"};
    return names;
}

inline std::vector<HarmonicTerm> builtin_terms(const std::string& name) {
    if (name == "sin") return {{1, 0.0, 1.0}};
    if (name == "cos") return {{1, 1.0, 0.0}};
    if (name == "sin+cos") return {{1, 1.0, 1.0}};
    if (name == "sin+half") return {{0, 0.5, 0.0}, {1, 0.0, 1.0}};
    if (name == "sin3") return {{3, 0.0, 1.0}};
    if (name == "mixed") return {{1, 0.0, 1.0}, {2, 0.3, 0.0}, {3, 0.0, -0.2}};
    throw Error(ErrorCode::ParseError, "unknown builtin function '" + name + "'");
}

/// Compiles the description to a PeriodicFunction whose bandwidth is the largest frequency.
inline PeriodicFunction compile(const FunctionSpec& spec) {
    const auto terms = spec.kind == FunctionSpec::Kind::builtin ? builtin_terms(spec.builtin) : spec.terms;
    PeriodicFunction f;
    for (const auto& t : terms) f += PeriodicFunction::harmonic(t.frequency, t.cos_amplitude, t.sin_amplitude);
    return f;
}

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

} // namespace detail

inline FunctionSpec parse_function(const json& j) {
    FunctionSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "builtin") {
        spec.kind = FunctionSpec::Kind::builtin;
        spec.builtin = j.at("name").get<std::string>();
        (void)builtin_terms(spec.builtin);
    } else if (kind == "harmonic") {
        spec.kind = FunctionSpec::Kind::harmonic;
        for (const auto& t : j.at("terms")) {
            const long long freq = t.at("frequency").get<long long>();
            if (freq < 0) throw Error(ErrorCode::ParseError, "harmonic frequency must be non-negative");
            spec.terms.push_back({static_cast<std::size_t>(freq), detail::get_or(t, "cos", 0.0),
                                  detail::get_or(t, "sin", 0.0)});
        }
    } else {
        throw Error(ErrorCode::ParseError, "function kind must be 'harmonic' or 'builtin'");
    }
    return spec;
}

inline std::vector<Node> to_nodes(const std::vector<NodeSpec>& specs) {
    std::vector<Node> nodes;
    nodes.reserve(specs.size());
    for (const auto& n : specs) nodes.push_back({n.x, WeightFunction::make(n.weight, n.half_width)});
    return nodes;
}

/// Problem skeleton (targets left empty) with every layout invariant checked.
inline MeanInterpolationProblem make_problem(const RunConfig& cfg) {
    MeanInterpolationProblem p;
    p.order = cfg.order;
    p.m = cfg.m;
    p.nodes = to_nodes(cfg.nodes);
    p.smoothing = cfg.smoothing;
    p.grid = SpectralGrid(cfg.grid);
    p.bandwidth = cfg.bandwidth;
    p.validate();
    return p;
}

/// Parses and validates a config document. All failures surface as ParseError.
inline RunConfig parse_config(const json& j) {
    try {
        RunConfig cfg;
        cfg.order = j.at("r").get<int>();
        cfg.m = j.at("m").get<int>();
        for (const auto& n : j.at("nodes")) {
            NodeSpec spec;
            spec.x = n.at("x").get<double>();
            spec.weight = weight_kind_from_string(detail::get_or<std::string>(n, "weight", "box"));
            spec.half_width = spec.weight == WeightKind::delta ? 0.0 : n.at("half_width").get<double>();
            cfg.nodes.push_back(spec);
        }
        cfg.function = parse_function(j.at("function"));
        cfg.smoothing = detail::get_or(j, "smoothing", cfg.smoothing);
        cfg.grid = detail::get_or(j, "grid", cfg.grid);
        cfg.bandwidth = detail::get_or(j, "bandwidth", cfg.bandwidth);
        cfg.refine_bandwidth = detail::get_or(j, "refine_bandwidth", cfg.refine_bandwidth);
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            cfg.tolerances.residual = detail::get_or(t, "residual", cfg.tolerances.residual);
            cfg.tolerances.mean_zero = detail::get_or(t, "mean_zero", cfg.tolerances.mean_zero);
            cfg.tolerances.extremal = detail::get_or(t, "extremal", cfg.tolerances.extremal);
            cfg.tolerances.zero = detail::get_or(t, "zero", cfg.tolerances.zero);
        }
        if (j.contains("output")) {
            const auto& o = j.at("output");
            if (o.contains("spline")) cfg.out_spline = o.at("spline").get<std::string>();
            if (o.contains("report")) cfg.out_report = o.at("report").get<std::string>();
        }
        if (cfg.bandwidth < 1) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
        (void)make_problem(cfg);
        return cfg;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        throw Error(ErrorCode::ParseError, e.what());
    }
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

} // namespace perfspline::app
