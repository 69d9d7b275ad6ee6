// Copyright 2026 The macrobell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Batch front end shared by the macrobell executable and its tests.
//
// Configuration is a JSON document with a top-level "seed" and one table per
// subcommand ("bell", "sweep", "spdc", "game", "posner", "tails").
// Precedence, lowest first: built-in defaults, the --config file, command-line
// flags. Worker count never enters a report, so reports are byte-identical
// for any --threads value.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "macrobell/macrobell.hpp"

namespace macrobell::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

inline json default_config() {
    constexpr double pi = std::numbers::pi;
    return json{
        {"seed", 20190101},
        {"bell",
         {{"strategy", "chsh"},
          {"n_pairs", 100},
          {"trials_per_setting", 100000},
          {"epsilon", 0.0},
          {"noise_mode", "independent"},
          {"bootstrap", 200}}},
        {"spdc",
         {{"strategy", "chsh"},
          {"m_incident", 1000000},
          {"lambda", 1e-3},
          {"gamma", 1.0},
          {"trials_per_setting", 100000},
          {"bootstrap", 200}}},
        {"sweep", {{"param", "gamma"}, {"start", 0.1}, {"stop", 1.0}, {"step", 0.1}}},
        {"game", {{"strategy", "chsh"}, {"n_players", 10000}, {"rounds", 100000}}},
        {"posner", {{"theta_start", -pi}, {"theta_stop", pi}, {"theta_count", 65}}},
        {"tails", {{"n", 1.0}, {"var_cap", 0.25}, {"cov_cap", 1.0 / 7.0}}},
    };
}

/// 64-bit FNV-1a of the canonical (key-sorted, compact) JSON text.
inline std::string config_hash(const json &cfg) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace detail {

inline const json &field(const json &section, const std::string &path, const std::string &key) {
    if (!section.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return section.at(key);
}

inline double get_double(const json &section, const std::string &path, const std::string &key) {
    const auto &v = field(section, path, key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path + "." + key + ": must be finite");
    return d;
}

inline int64_t get_int(const json &section, const std::string &path, const std::string &key, int64_t min_value) {
    const auto &v = field(section, path, key);
    int64_t n = 0;
    if (v.is_number_integer()) {
        n = v.get<int64_t>();
    } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
        n = static_cast<int64_t>(v.get<double>());
    } else {
        throw ConfigError(path + "." + key + ": expected an integer");
    }
    if (n < min_value) throw ConfigError(path + "." + key + ": must be >= " + std::to_string(min_value));
    return n;
}

inline std::string get_string(const json &section, const std::string &path, const std::string &key) {
    const auto &v = field(section, path, key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline std::array<double, 2> get_pair(const json &obj, const std::string &path, const std::string &key) {
    const auto &v = field(obj, path, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(path + "." + key + ": expected an array of two numbers");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

inline DeterministicTable parse_table(const json &obj, const std::string &path) {
    DeterministicTable t;
    const auto a = get_pair(obj, path, "a");
    const auto b = get_pair(obj, path, "b");
    for (int i = 0; i < 2; ++i) {
        if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1)) {
            throw ConfigError(path + ": table entries must be 0 or 1");
        }
        t.a[i] = static_cast<uint8_t>(a[i]);
        t.b[i] = static_cast<uint8_t>(b[i]);
    }
    return t;
}

}  // namespace detail

/// Strategy from a preset name or an object with a "kind" field.
///
/// Presets: "chsh" (singlets at the CHSH angles), "zeros", "ones",
/// "coin" (global coin over all-ones / all-zeros), "independent" (every
/// answer an independent fair coin).
inline StrategySpec parse_strategy(const json &v, const std::string &path) {
    using detail::get_pair;
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        if (name == "chsh") return QuantumSinglet::chsh();
        if (name == "zeros") return DeterministicTable::constant(0);
        if (name == "ones") return DeterministicTable::constant(1);
        if (name == "coin") return GlobalCoin{DeterministicTable::constant(1), DeterministicTable::constant(0), 0.5};
        if (name == "independent") {
            LocalRandom m;
            for (unsigned c = 0; c < 16; ++c) m.mixture.push_back({DeterministicTable::from_code(c), 1.0 / 16});
            return m;
        }
        throw ConfigError(path + ": unknown strategy preset '" + name + "'");
    }
    if (!v.is_object()) throw ConfigError(path + ": expected a preset name or an object");
    const auto kind = detail::get_string(v, path, "kind");
    StrategySpec spec;
    if (kind == "deterministic") {
        spec = detail::parse_table(v, path);
    } else if (kind == "local_random") {
        const auto &mix = detail::field(v, path, "mixture");
        if (!mix.is_array() || mix.empty()) throw ConfigError(path + ".mixture: expected a non-empty array");
        LocalRandom m;
        for (size_t i = 0; i < mix.size(); ++i) {
            const auto p = path + ".mixture[" + std::to_string(i) + "]";
            m.mixture.push_back({detail::parse_table(mix[i], p), detail::get_double(mix[i], p, "weight")});
        }
        spec = m;
    } else if (kind == "global_coin") {
        GlobalCoin g;
        g.heads = detail::parse_table(detail::field(v, path, "heads"), path + ".heads");
        g.tails = detail::parse_table(detail::field(v, path, "tails"), path + ".tails");
        if (v.contains("p_heads")) g.p_heads = detail::get_double(v, path, "p_heads");
        spec = g;
    } else if (kind == "quantum_singlet") {
        spec = QuantumSinglet{get_pair(v, path, "theta_a"), get_pair(v, path, "theta_b")};
    } else {
        throw ConfigError(path + ".kind: unknown kind '" + kind + "'");
    }
    try {
        validate(spec);
    } catch (const InvalidInput &e) {
        throw ConfigError(path + ": " + e.what());
    }
    return spec;
}

struct BellConfig {
    StrategySpec strategy;
    ExperimentOptions options;
};

inline BellConfig parse_bell(const json &cfg) {
    const auto &s = detail::field(cfg, "config", "bell");
    BellConfig out;
    out.strategy = parse_strategy(detail::field(s, "bell", "strategy"), "bell.strategy");
    out.options.n_pairs = detail::get_int(s, "bell", "n_pairs", 1);
    out.options.trials_per_setting = detail::get_int(s, "bell", "trials_per_setting", 2);
    out.options.noise.epsilon = detail::get_double(s, "bell", "epsilon");
    if (out.options.noise.epsilon < 0) throw ConfigError("bell.epsilon: must be >= 0");
    const auto mode = detail::get_string(s, "bell", "noise_mode");
    if (mode == "independent") {
        out.options.noise.mode = NoiseMode::kIndependent;
    } else if (mode == "common") {
        out.options.noise.mode = NoiseMode::kCommonMode;
    } else {
        throw ConfigError("bell.noise_mode: expected 'independent' or 'common'");
    }
    out.options.bootstrap_resamples = static_cast<int>(detail::get_int(s, "bell", "bootstrap", 2));
    out.options.seed = cfg.at("seed").get<uint64_t>();
    return out;
}

struct SpdcConfig {
    SpdcParams params;
    int64_t trials_per_setting = 0;
    int bootstrap = 200;
};

inline SpdcConfig parse_spdc(const json &cfg) {
    const auto &s = detail::field(cfg, "config", "spdc");
    SpdcConfig out;
    out.params.strategy = parse_strategy(detail::field(s, "spdc", "strategy"), "spdc.strategy");
    out.params.m_incident = detail::get_int(s, "spdc", "m_incident", 1);
    out.params.lambda = detail::get_double(s, "spdc", "lambda");
    if (!(out.params.lambda >= 0 && out.params.lambda < 1)) throw ConfigError("spdc.lambda: must lie in [0, 1)");
    out.params.gamma = detail::get_double(s, "spdc", "gamma");
    if (!(out.params.gamma >= 0 && out.params.gamma <= 1)) throw ConfigError("spdc.gamma: must lie in [0, 1]");
    out.trials_per_setting = detail::get_int(s, "spdc", "trials_per_setting", 100);
    out.bootstrap = static_cast<int>(detail::get_int(s, "spdc", "bootstrap", 2));
    return out;
}

struct Report {
    json document;     // {config, results, references, meta}
    std::string text;  // human-readable summary for stdout
    std::string csv;   // tabular artifact
};

namespace detail {

inline std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

inline std::string fmt_g(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline Report start_report(const json &cfg, const std::string &command, const json &section) {
    Report r;
    json used{{"seed", cfg.at("seed")}, {command, section}};
    r.document["config"] = used;
    r.document["meta"] = {{"command", command},
                          {"version", kVersion},
                          {"seed", cfg.at("seed")},
                          {"config_hash", config_hash(used)}};
    r.text = "macrobell " + std::string(kVersion) + " " + command + " seed=" + cfg.at("seed").dump() +
             " config_hash=" + config_hash(used) + "\n";
    return r;
}

inline json estimate_json(const BellEstimate &e) {
    return {{"b_hat", e.b_hat},
            {"std_err", e.std_err},
            {"n_pairs", e.n_pairs},
            {"covariances", e.covariances},
            {"trials_per_setting", e.trials_per_setting}};
}

inline std::vector<double> grid(double start, double stop, double step, const std::string &path) {
    if (!(step > 0)) throw ConfigError(path + ".step: must be > 0");
    if (stop < start) throw ConfigError(path + ".stop: must be >= start");
    std::vector<double> g;
    const auto count = static_cast<int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int64_t i = 0; i < count; ++i) g.push_back(start + static_cast<double>(i) * step);
    return g;
}

/// Sweep values: explicit "values" array, else start/stop/step.
inline std::vector<double> sweep_values(const json &s) {
    if (s.contains("values")) {
        const auto &v = s.at("values");
        if (!v.is_array() || v.empty()) throw ConfigError("sweep.values: expected a non-empty array of numbers");
        std::vector<double> out;
        for (const auto &x : v) {
            if (!x.is_number()) throw ConfigError("sweep.values: expected numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    return grid(get_double(s, "sweep", "start"), get_double(s, "sweep", "stop"), get_double(s, "sweep", "step"),
                "sweep");
}

}  // namespace detail

inline Report run_bell(const json &cfg, unsigned workers) {
    auto bc = parse_bell(cfg);
    bc.options.workers = workers;
    auto r = detail::start_report(cfg, "bell", cfg.at("bell"));
    const auto est = run_bell_experiment(bc.strategy, bc.options);
    const double eps = bc.options.noise.epsilon;
    const double cb = classical_bound(eps);
    const double qb = quantum_lower_bound(eps);
    const bool violates = est.b_hat > cb;
    r.document["results"] = {{"estimate", detail::estimate_json(est)},
                             {"classical_bound", cb},
                             {"quantum_lower_bound", qb},
                             {"violates_classical_bound", violates}};
    r.document["references"] = {{"classical_bound_eps0", 16.0 / 7.0},
                                {"quantum_value_eps0", 2 * std::numbers::sqrt2},
                                {"global_coin_value", "2N"}};
    std::ostringstream os;
    os << "strategy: " << kind_name(bc.strategy) << "  N=" << bc.options.n_pairs
       << "  trials/setting=" << bc.options.trials_per_setting << "  epsilon=" << detail::fmt_g(eps) << "\n";
    os << "covariances (00,01,10,11): " << detail::fmt(est.covariances[0]) << " " << detail::fmt(est.covariances[1])
       << " " << detail::fmt(est.covariances[2]) << " " << detail::fmt(est.covariances[3]) << "\n";
    os << "B_hat = " << detail::fmt(est.b_hat) << " +- " << detail::fmt(est.std_err) << "\n";
    os << "classical_bound(eps) = " << detail::fmt(cb) << "\n";
    os << "quantum_lower_bound(eps) = " << detail::fmt(qb) << "\n";
    os << "violates classical bound: " << (violates ? "yes" : "no") << "\n";
    r.text += os.str();
    r.csv = "strategy,n_pairs,trials_per_setting,epsilon,B_hat,std_err,cov00,cov01,cov10,cov11,classical_bound,"
            "quantum_lower_bound,violates\n";
    r.csv += kind_name(bc.strategy) + "," + std::to_string(bc.options.n_pairs) + "," +
             std::to_string(bc.options.trials_per_setting) + "," + detail::fmt_g(eps) + "," +
             detail::fmt_g(est.b_hat) + "," + detail::fmt_g(est.std_err);
    for (double c : est.covariances) r.csv += "," + detail::fmt_g(c);
    r.csv += "," + detail::fmt_g(cb) + "," + detail::fmt_g(qb) + "," + (violates ? "yes" : "no") + "\n";
    return r;
}

inline Report run_spdc(const json &cfg, unsigned workers) {
    const auto sc = parse_spdc(cfg);
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    auto r = detail::start_report(cfg, "spdc", cfg.at("spdc"));
    const auto est = estimate_spdc_bell(sc.params, sc.trials_per_setting, seed, workers, sc.bootstrap);
    const auto bound = spdc_classical_bound(sc.params, est.n_pairs);
    const double analytic = spdc_quantum_value(sc.params.gamma);
    r.document["results"] = {{"estimate", detail::estimate_json(est)},
                             {"n_effective", est.n_pairs},
                             {"classical_leading", bound.leading},
                             {"classical_correction_scale", bound.correction_scale},
                             {"quantum_leading_value", analytic},
                             {"gamma_threshold", gamma_threshold()},
                             {"exceeds_leading_bound", est.b_hat > bound.leading}};
    r.document["references"] = {{"classical_leading", 4.0}, {"gamma_threshold", 0.828}};
    std::ostringstream os;
    os << "strategy: " << kind_name(sc.params.strategy) << "  M=" << sc.params.m_incident
       << "  lambda=" << detail::fmt_g(sc.params.lambda) << "  gamma=" << detail::fmt_g(sc.params.gamma) << "\n";
    os << "N_eff = " << detail::fmt(est.n_pairs, 3) << "\n";
    os << "B_hat = " << detail::fmt(est.b_hat) << " +- " << detail::fmt(est.std_err) << "\n";
    os << "classical bound: " << detail::fmt(bound.leading, 1) << " + O(" << detail::fmt_g(bound.correction_scale)
       << ")\n";
    os << "leading quantum value 2*gamma*(4 sin^2(3pi/8) - 1) = " << detail::fmt(analytic) << "\n";
    os << "gamma threshold = " << detail::fmt(gamma_threshold()) << "\n";
    os << "exceeds 4: " << (est.b_hat > bound.leading ? "yes" : "no") << "\n";
    r.text += os.str();
    r.csv = "gamma,lambda,M,N_eff,B_hat,std_err\n" + detail::fmt_g(sc.params.gamma) + "," +
            detail::fmt_g(sc.params.lambda) + "," + std::to_string(sc.params.m_incident) + "," +
            detail::fmt_g(est.n_pairs) + "," + detail::fmt_g(est.b_hat) + "," + detail::fmt_g(est.std_err) + "\n";
    return r;
}

/// One row per grid point. Every point reuses the master seed.
///
/// param = gamma | lambda: down-conversion source (columns gamma, lambda, M,
///   N_eff, B_hat, std_err) built from the "spdc" table.
/// param = epsilon: noisy Bell experiment from the "bell" table (columns
///   epsilon, B_hat, std_err, classical_bound, quantum_lower_bound).
/// param = theta: Posner even-binding curve (columns theta, p_even).
inline Report run_sweep(const json &cfg, unsigned workers) {
    const auto &s = detail::field(cfg, "config", "sweep");
    const auto param = detail::get_string(s, "sweep", "param");
    const auto values = detail::sweep_values(s);
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    json section{{"sweep", s}};
    if (param == "gamma" || param == "lambda") {
        section["spdc"] = cfg.at("spdc");
    } else if (param == "epsilon") {
        section["bell"] = cfg.at("bell");
    } else if (param != "theta") {
        throw ConfigError("sweep.param: expected gamma, lambda, epsilon or theta");
    }
    auto r = detail::start_report(cfg, "sweep", section);
    json rows = json::array();
    std::ostringstream os;
    if (param == "gamma" || param == "lambda") {
        auto sc = parse_spdc(cfg);
        r.csv = "gamma,lambda,M,N_eff,B_hat,std_err\n";
        std::vector<std::pair<double, double>> curve;
        for (double v : values) {
            auto p = sc.params;
            if (param == "gamma") {
                if (!(v >= 0 && v <= 1)) throw ConfigError("sweep.values: gamma must lie in [0, 1]");
                p.gamma = v;
            } else {
                if (!(v >= 0 && v < 1)) throw ConfigError("sweep.values: lambda must lie in [0, 1)");
                p.lambda = v;
            }
            const auto est = estimate_spdc_bell(p, sc.trials_per_setting, seed, workers, sc.bootstrap);
            rows.push_back({{"gamma", p.gamma},
                            {"lambda", p.lambda},
                            {"M", p.m_incident},
                            {"N_eff", est.n_pairs},
                            {"B_hat", est.b_hat},
                            {"std_err", est.std_err}});
            r.csv += detail::fmt_g(p.gamma) + "," + detail::fmt_g(p.lambda) + "," + std::to_string(p.m_incident) +
                     "," + detail::fmt_g(est.n_pairs) + "," + detail::fmt_g(est.b_hat) + "," +
                     detail::fmt_g(est.std_err) + "\n";
            os << param << "=" << detail::fmt_g(v) << "  N_eff=" << detail::fmt(est.n_pairs, 3)
               << "  B_hat=" << detail::fmt(est.b_hat) << " +- " << detail::fmt(est.std_err) << "\n";
            curve.emplace_back(v, est.b_hat);
        }
        json crossing = nullptr;
        for (size_t i = 1; i < curve.size(); ++i) {
            const auto [x0, y0] = curve[i - 1];
            const auto [x1, y1] = curve[i];
            if ((y0 - 4) * (y1 - 4) <= 0 && y0 != y1) {
                crossing = x0 + (4 - y0) * (x1 - x0) / (y1 - y0);
                break;
            }
        }
        r.document["results"] = {{"rows", rows}, {"crossing_of_4", crossing}};
        if (!crossing.is_null()) os << "B_hat crosses 4 at " << param << " ~ " << detail::fmt(crossing.get<double>(), 4) << "\n";
        r.document["references"] = {{"gamma_threshold", 0.828}, {"analytic_gamma_threshold", gamma_threshold()}};
    } else if (param == "epsilon") {
        auto bc = parse_bell(cfg);
        bc.options.workers = workers;
        r.csv = "epsilon,B_hat,std_err,classical_bound,quantum_lower_bound\n";
        for (double v : values) {
            if (!(v >= 0)) throw ConfigError("sweep.values: epsilon must be >= 0");
            auto opt = bc.options;
            opt.noise.epsilon = v;
            const auto est = run_bell_experiment(bc.strategy, opt);
            rows.push_back({{"epsilon", v},
                            {"B_hat", est.b_hat},
                            {"std_err", est.std_err},
                            {"classical_bound", classical_bound(v)},
                            {"quantum_lower_bound", quantum_lower_bound(v)}});
            r.csv += detail::fmt_g(v) + "," + detail::fmt_g(est.b_hat) + "," + detail::fmt_g(est.std_err) + "," +
                     detail::fmt_g(classical_bound(v)) + "," + detail::fmt_g(quantum_lower_bound(v)) + "\n";
            os << "epsilon=" << detail::fmt_g(v) << "  B_hat=" << detail::fmt(est.b_hat) << " +- "
               << detail::fmt(est.std_err) << "  quantum_lower_bound=" << detail::fmt(quantum_lower_bound(v)) << "\n";
        }
        r.document["results"] = {{"rows", rows}};
        r.document["references"] = {{"quantum_value_eps0", 2 * std::numbers::sqrt2}};
    } else {
        r.csv = "theta,p_even\n";
        for (const auto &[theta, p] : even_binding_curve(values)) {
            rows.push_back({{"theta", theta}, {"p_even", p}});
            r.csv += detail::fmt_g(theta) + "," + detail::fmt_g(p) + "\n";
            os << "theta=" << detail::fmt(theta, 6) << "  p_even=" << detail::fmt(p) << "\n";
        }
        r.document["results"] = {{"rows", rows}};
        r.document["references"] = {{"p_even_pi_over_4", 0.934}, {"p_even_3pi_over_4", 0.620}};
    }
    r.text += os.str();
    return r;
}

inline Report run_game(const json &cfg, unsigned workers) {
    const auto &s = detail::field(cfg, "config", "game");
    const auto spec = parse_strategy(detail::field(s, "game", "strategy"), "game.strategy");
    const auto n = detail::get_int(s, "game", "n_players", 1);
    const auto rounds = detail::get_int(s, "game", "rounds", 4);
    const uint64_t seed = cfg.at("seed").get<uint64_t>();
    auto r = detail::start_report(cfg, "game", s);
    const auto transcript = play_game(spec, n, rounds, seed, workers);
    const auto rep = score_transcript(transcript);
    const double gaussian = quantum_game_score(static_cast<double>(n));
    json pairs = json::object();
    for (int p = 0; p < 4; ++p) {
        pairs[setting_name(p)] = {{"win_fraction", rep.per_pair_win_fraction[p]},
                                  {"rounds", rep.per_pair_round_count[p]},
                                  {"wins", rep.per_pair_wins[p]}};
    }
    r.document["results"] = {{"score", rep.score},
                             {"score_std_err", rep.score_std_err},
                             {"worst_pair", setting_name(rep.worst_pair)},
                             {"per_pair", pairs},
                             {"average_a", rep.average_a},
                             {"average_b", rep.average_b},
                             {"quantum_gaussian_limit", gaussian}};
    r.document["references"] = {{"classical_score_bound", 0.0102}, {"quantum_score", 0.0150}};
    std::ostringstream os;
    os << "strategy: " << kind_name(spec) << "  N=" << n << "  rounds=" << rounds << "\n";
    for (int p = 0; p < 4; ++p) {
        os << "pair " << setting_name(p) << ": " << rep.per_pair_wins[p] << "/" << rep.per_pair_round_count[p]
           << " = " << detail::fmt(rep.per_pair_win_fraction[p]) << "\n";
    }
    os << "score = " << detail::fmt(rep.score) << " +- " << detail::fmt(rep.score_std_err) << "\n";
    os << "quantum Gaussian-limit score = " << detail::fmt(gaussian) << " (reference >= 0.0150)\n";
    os << "classical bound reference = 0.0102\n";
    r.text += os.str();
    r.csv = "round,x,y,a_count,b_count,win\n";
    std::string &csv = r.csv;
    for (size_t i = 0; i < transcript.rounds.size(); ++i) {
        const auto &g = transcript.rounds[i];
        csv += std::to_string(i) + "," + std::to_string(g.x) + "," + std::to_string(g.y) + "," +
               std::to_string(g.a_count) + "," + std::to_string(g.b_count) + "," +
               (round_won(g, rep.average_a, rep.average_b, n) ? "1" : "0") + "\n";
    }
    return r;
}

inline Report run_posner(const json &cfg, unsigned /*workers*/) {
    const auto &s = detail::field(cfg, "config", "posner");
    std::vector<double> thetas;
    if (s.contains("theta_grid")) {
        const auto &g = s.at("theta_grid");
        if (!g.is_array() || g.empty()) throw ConfigError("posner.theta_grid: expected a non-empty array");
        for (const auto &v : g) {
            if (!v.is_number()) throw ConfigError("posner.theta_grid: expected numbers");
            thetas.push_back(v.get<double>());
        }
    } else {
        const double a = detail::get_double(s, "posner", "theta_start");
        const double b = detail::get_double(s, "posner", "theta_stop");
        const auto count = detail::get_int(s, "posner", "theta_count", 1);
        for (int64_t i = 0; i < count; ++i) {
            thetas.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
        }
    }
    auto r = detail::start_report(cfg, "posner", s);
    const auto curve = even_binding_curve(thetas);
    const auto game = analyze_posner_game();
    json rows = json::array();
    r.csv = "theta,p_even\n";
    for (const auto &[theta, p] : curve) {
        rows.push_back({{"theta", theta}, {"p_even", p}});
        r.csv += detail::fmt_g(theta) + "," + detail::fmt_g(p) + "\n";
    }
    json per_pair = json::object();
    for (int p = 0; p < 4; ++p) {
        per_pair[setting_name(p)] = {{"p_even", game.p_even[p]}, {"p_win", game.p_win[p]}};
    }
    r.document["results"] = {{"curve", rows}, {"game", {{"per_pair", per_pair}, {"win_probability", game.win_probability}}}};
    r.document["references"] = {{"table_p_even", {{"00", 0.934}, {"01", 0.934}, {"10", 0.934}, {"11", 0.620}}},
                                {"win_probability_at_least", 0.795},
                                {"classical_chsh_value", 0.75}};
    std::ostringstream os;
    os << "even-binding curve: " << curve.size() << " points\n";
    for (int p = 0; p < 4; ++p) {
        os << "pair " << setting_name(p) << ": p_even=" << detail::fmt(game.p_even[p])
           << " (reference " << (p == 3 ? "0.620" : "0.934") << ")  p_win=" << detail::fmt(game.p_win[p]) << "\n";
    }
    os << "win probability = " << detail::fmt(game.win_probability) << " (reference >= 0.795, classical 0.75)\n";
    r.text += os.str();
    return r;
}

inline Report run_tails(const json &cfg, unsigned /*workers*/) {
    const auto &s = detail::field(cfg, "config", "tails");
    const double n = detail::get_double(s, "tails", "n");
    const double var_cap = detail::get_double(s, "tails", "var_cap") * n;
    const double cov_cap = detail::get_double(s, "tails", "cov_cap") * n;
    if (!(n > 0)) throw ConfigError("tails.n: must be > 0");
    if (!(var_cap > 0)) throw ConfigError("tails.var_cap: must be > 0");
    if (!(cov_cap >= 0)) throw ConfigError("tails.cov_cap: must be >= 0");
    auto r = detail::start_report(cfg, "tails", s);
    const auto m = maximize_tail_probability(var_cap, cov_cap, n);
    const double doubled = 2 * m.max_prob;
    const double quantum = quantum_game_score(n);
    r.document["results"] = {{"max_prob", m.max_prob},
                             {"argmax", {{"var_x", m.argmax.var_x}, {"var_y", m.argmax.var_y}, {"cov", m.argmax.cov}}},
                             {"classical_score_bound", doubled},
                             {"quantum_game_score", quantum}};
    r.document["references"] = {{"max_tail_below", 0.0051}, {"classical_score_bound", 0.0102}, {"quantum_score", 0.0150}};
    std::ostringstream os;
    os << "variance cap = " << detail::fmt_g(var_cap) << "  covariance cap = " << detail::fmt_g(cov_cap)
       << "  N = " << detail::fmt_g(n) << "\n";
    os << "max tail probability = " << detail::fmt(m.max_prob, 8) << " at var_x=" << detail::fmt_g(m.argmax.var_x)
       << " var_y=" << detail::fmt_g(m.argmax.var_y) << " cov=" << detail::fmt_g(m.argmax.cov)
       << " (reference: slightly below 0.0051)\n";
    os << "classical score bound = " << detail::fmt(doubled, 8) << " (reference 0.0102)\n";
    os << "quantum game score = " << detail::fmt(quantum, 8) << " (reference >= 0.0150)\n";
    r.text += os.str();
    r.csv = "var_cap,cov_cap,n,max_prob,var_x,var_y,cov,classical_score_bound,quantum_game_score\n" +
            detail::fmt_g(var_cap) + "," + detail::fmt_g(cov_cap) + "," + detail::fmt_g(n) + "," +
            detail::fmt_g(m.max_prob) + "," + detail::fmt_g(m.argmax.var_x) + "," + detail::fmt_g(m.argmax.var_y) +
            "," + detail::fmt_g(m.argmax.cov) + "," + detail::fmt_g(doubled) + "," + detail::fmt_g(quantum) + "\n";
    return r;
}

/// Defaults, then the config file, then flag overrides (RFC 7386 merge patch).
inline json effective_config(const std::string &config_path, const json &overrides) {
    json cfg = default_config();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("--config: cannot open " + config_path);
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error &e) {
            throw ConfigError("--config: " + std::string(e.what()));
        }
        if (!file.is_object()) throw ConfigError("--config: top level must be an object");
        cfg.merge_patch(file);
    }
    cfg.merge_patch(overrides);
    if (!cfg.at("seed").is_number_unsigned() && !(cfg.at("seed").is_number_integer() && cfg.at("seed").get<int64_t>() >= 0)) {
        throw ConfigError("seed: expected a non-negative 64-bit integer");
    }
    return cfg;
}

struct Invocation {
    std::string command;
    std::string config_path;
    json overrides = json::object();
    std::string out_path;
    std::string format = "json";
    unsigned workers = 0;
};

/// Runs one subcommand; writes the summary to out, the artifact to
/// inv.out_path, and diagnostics to err. Returns the process exit code.
inline int execute(const Invocation &inv, std::ostream &out, std::ostream &err) {
    try {
        if (inv.format != "json" && inv.format != "csv") throw ConfigError("--format: expected csv or json");
        const json cfg = effective_config(inv.config_path, inv.overrides);
        Report rep;
        if (inv.command == "bell") rep = run_bell(cfg, inv.workers);
        else if (inv.command == "sweep") rep = run_sweep(cfg, inv.workers);
        else if (inv.command == "spdc") rep = run_spdc(cfg, inv.workers);
        else if (inv.command == "game") rep = run_game(cfg, inv.workers);
        else if (inv.command == "posner") rep = run_posner(cfg, inv.workers);
        else if (inv.command == "tails") rep = run_tails(cfg, inv.workers);
        else throw ConfigError("unknown subcommand '" + inv.command + "'");
        out << rep.text;
        if (!inv.out_path.empty()) {
            std::ofstream f(inv.out_path, std::ios::binary);
            if (!f) throw ConfigError("--out: cannot write " + inv.out_path);
            if (inv.format == "json") f << rep.document.dump(2) << "\n";
            else f << rep.csv;
        }
        return kExitOk;
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidInput &e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception &e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError &e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const InsufficientData &e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ResourceError &e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace macrobell::cli
