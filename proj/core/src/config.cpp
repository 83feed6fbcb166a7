// Copyright 2026 The QRC Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qrc/config.hpp"

#include "qrc/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace qrc::config {

namespace {

const std::vector<std::string> kSections = {"dynamics", "model", "training", "predict", "sweep", "grid"};

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

double to_double(const std::string &text, const std::string &key) {
    const auto t = trim(text);
    double v = 0.0;
    const auto *end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError("config key " + key + ": expected a number, got '" + text + "'");
    }
    return v;
}

const KeySpec &find_spec(const std::string &key) {
    for (const auto &s : key_specs()) {
        if (s.key == key) {
            return s;
        }
    }
    throw ConfigError("unknown config key '" + key + "' (see --help for the list)");
}

} // namespace

const std::vector<KeySpec> &key_specs() {
    static const std::vector<KeySpec> specs = {
        {"dynamics.model", "l63", "l63 | l8 | narma2 | mackey_glass"},
        {"dynamics.sigma", "10", "Prandtl number sigma"},
        {"dynamics.r", "28", "relative Rayleigh number r"},
        {"dynamics.b", "2.6666666666666665", "geometry parameter b = 4 G^2 / (4 + G^2), 0 < b < 4"},
        {"dynamics.l8_form", "corrected", "8-mode coefficient table: corrected | as_printed"},
        {"dynamics.dt", "0.02", "RK4 step"},
        {"dynamics.steps", "4000", "integration steps written after the transient (rows = steps + 1)"},
        {"dynamics.transient", "1000", "discarded RK4 steps before recording"},
        {"dynamics.seed", "1", "seed of the random initial condition in [-1, 1]^dof"},
        {"dynamics.mg_delay", "2", "Mackey-Glass delay T"},
        {"dynamics.mg_exponent", "10", "Mackey-Glass exponent"},
        {"dynamics.mg_dt", "0.1", "Mackey-Glass step"},
        {"dynamics.mg_history", "0.5", "Mackey-Glass constant history"},
        {"dynamics.lyapunov_steps", "200000", "Benettin steps after the transient"},
        {"dynamics.lyapunov_transient", "10000", "Benettin transient steps"},
        {"dynamics.lyapunov_renorm", "10", "steps between renormalizations"},
        {"dynamics.lyapunov_perturbation", "1e-08", "initial separation"},
        {"model.kind", "qrcm", "qrcm | crcm"},
        {"model.n", "9", "QRCM qubits"},
        {"model.eps", "0.05", "QRCM leaking rate in [0, 1]"},
        {"model.shots", "0", "QRCM shots per step, 0 = exact probabilities"},
        {"model.seed", "1", "reservoir seed (beta angles, selected indices, W_in, W_r, sampling)"},
        {"model.reduced", "false", "one-block circuit fed by selected probabilities"},
        {"model.n_selected", "14", "probabilities fed back in reduced mode"},
        {"model.input_scale", "3.141592653589793", "RY angle prefactor for normalized inputs"},
        {"model.block_size", "0", "reduced mode: qubits per entangled block, 0 = all"},
        {"model.p_gate", "0", "Pauli error probability after each gate"},
        {"model.p_meas", "0", "readout bit-flip probability"},
        {"model.p_reset", "0", "probability a qubit is reset to |0> before readout"},
        {"model.max_trajectories", "256", "gate-noise Monte-Carlo trajectories per step"},
        {"model.n_res", "512", "CRCM reservoir size"},
        {"model.crc_eps", "0.12", "CRCM leaking rate"},
        {"model.density", "0.2", "CRCM nonzero fraction of W_r"},
        {"model.spectral_radius", "1.01", "CRCM spectral radius of W_r"},
        {"training.scenario", "closed_loop", "closed_loop | open_loop"},
        {"training.inputs", "", "comma-separated input column labels; empty = all columns"},
        {"training.train_steps", "2000", "training transitions (rows 0..train_steps); 0 = whole file"},
        {"training.washout", "50", "discarded leading reservoir states"},
        {"training.gamma", "0", "ridge regularization, >= 0"},
        {"training.normalize", "true", "min-max normalize every column with the training extremes"},
        {"predict.steps", "1000", "closed-loop prediction steps"},
        {"predict.lyapunov", "0", "largest Lyapunov exponent for horizon units; 0 = steps only"},
        {"predict.threshold", "0.3", "normalized-error threshold of the prediction horizon"},
        {"sweep.scenario", "closed_loop_l63",
         "closed_loop_l63 | open_loop_l8 | reduced_noisy_l8 | pblock_l8 | benchmark_leakrate | crcm_regularization | opcount"},
        {"sweep.seeds", "auto", "realizations per cell"},
        {"sweep.base_seed", "1", "seed of realization i is base_seed + i"},
        {"sweep.data_seed", "auto", "initial condition of the ground-truth trajectory"},
        {"sweep.train_steps", "auto", "training transitions"},
        {"sweep.washout", "auto", "washout steps"},
        {"sweep.test_steps", "auto", "test window length"},
        {"sweep.transient", "auto", "discarded trajectory steps"},
        {"sweep.dt", "auto", "trajectory step"},
        {"sweep.shots", "auto", "shots per step, 0 = exact (reduced_noisy_l8: 0 = 2^(10+n))"},
        {"sweep.input_scale", "auto", "RY angle prefactor"},
        {"sweep.lyapunov", "auto", "Lyapunov exponent for closed-loop horizons"},
        {"sweep.horizon_threshold", "auto", "normalized-error threshold"},
        {"sweep.crc_eps", "auto", "CRCM leaking rate"},
        {"sweep.crc_density", "auto", "CRCM density"},
        {"sweep.crc_spectral_radius", "auto", "CRCM spectral radius"},
        {"sweep.ridge_gamma", "auto", "ridge parameter of scenarios without a gamma grid"},
        {"sweep.n_selected", "auto", "reduced-circuit feedback indices"},
        {"sweep.max_trajectories", "auto", "gate-noise trajectories"},
        {"sweep.xi", "3", "opcount: per-qubit gate factor"},
        {"sweep.opcount_n", "1..32", "opcount: qubit range"},
        {"grid.eps", "auto", "leaking rates"},
        {"grid.n", "auto", "qubit counts"},
        {"grid.gamma", "auto", "ridge parameters"},
        {"grid.n_res", "auto", "CRCM sizes"},
        {"grid.qrcm_n", "auto", "QRCM reference qubits (regularization study); empty = none"},
        {"grid.qrcm_eps", "auto", "QRCM reference leaking rate"},
        {"grid.p", "auto", "block sizes"},
        {"grid.p_gate", "auto", "gate error probabilities"},
        {"grid.p_meas", "auto", "readout error probabilities"},
        {"grid.p_reset", "auto", "reset error probabilities"},
        {"grid.n_narma", "auto", "NARMA-2 qubits"},
        {"grid.n_mg", "auto", "Mackey-Glass qubits"},
    };
    return specs;
}

RunConfig::RunConfig() {
    for (const auto &s : key_specs()) {
        values_[s.key] = s.default_value;
    }
}

namespace {

// ptree drops positions, so locate a section header or key line in the raw
// text for error messages. Returns 0 when not found.
std::size_t line_of(const std::string &text, const std::string &section, const std::string &key) {
    std::istringstream is(text);
    std::string line;
    std::string current;
    for (std::size_t no = 1; std::getline(is, line); ++no) {
        const auto t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') {
            continue;
        }
        if (t.front() == '[' && t.back() == ']') {
            current = trim(t.substr(1, t.size() - 2));
            if (key.empty() && current == section) {
                return no;
            }
            continue;
        }
        const auto eq = t.find('=');
        const auto name = trim(eq == std::string::npos ? t : t.substr(0, eq));
        if (current == section && name == key) {
            return no;
        }
        if (current.empty() && key.empty() && name == section) {
            return no;
        }
    }
    return 0;
}

std::string where(const std::string &source, std::size_t line) {
    return line > 0 ? source + ":" + std::to_string(line) : source;
}

} // namespace

RunConfig RunConfig::parse(std::istream &in, const std::string &source) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::istringstream is(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig cfg;
    for (const auto &[section, body] : tree) {
        if (body.empty()) {
            throw ConfigError(where(source, line_of(text, section, "")) + ": key '" + section + "' outside a section");
        }
        if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
            throw ConfigError(where(source, line_of(text, section, "")) + ": unknown section [" + section + "]");
        }
        for (const auto &[key, node] : body) {
            try {
                cfg.set(section + "." + key, node.get_value<std::string>());
            } catch (const ConfigError &e) {
                throw ConfigError(where(source, line_of(text, section, key)) + ": " + e.what());
            }
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return parse(in, path.string());
}

void RunConfig::set(const std::string &key, const std::string &value) {
    find_spec(key);
    values_[key] = trim(value);
}

void RunConfig::set_assignment(const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("expected key=value, got '" + assignment + "'");
    }
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

const std::string &RunConfig::get(const std::string &key) const {
    find_spec(key);
    return values_.at(key);
}

bool RunConfig::is_auto(const std::string &key) const { return get(key) == "auto"; }

double RunConfig::number(const std::string &key) const { return to_double(get(key), key); }

std::int64_t RunConfig::integer(const std::string &key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) {
        throw ConfigError("config key " + key + ": expected an integer, got '" + get(key) + "'");
    }
    return static_cast<std::int64_t>(v);
}

std::uint64_t RunConfig::count(const std::string &key) const {
    const auto &text = get(key);
    std::uint64_t v = 0;
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError("config key " + key + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

bool RunConfig::flag(const std::string &key) const {
    const auto &v = get(key);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("config key " + key + ": expected true or false, got '" + v + "'");
}

std::vector<double> RunConfig::numbers(const std::string &key) const { return parse_list(get(key), key); }

std::vector<std::string> RunConfig::strings(const std::string &key) const {
    const auto &v = get(key);
    if (v.empty()) {
        return {};
    }
    return split(v, ',');
}

std::string RunConfig::dump() const {
    std::ostringstream os;
    std::string section;
    for (const auto &s : key_specs()) {
        const auto dot = s.key.find('.');
        const auto sec = s.key.substr(0, dot);
        if (sec != section) {
            os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        os << "; " << s.help << " (default: " << (s.default_value.empty() ? "empty" : s.default_value) << ")\n";
        os << s.key.substr(dot + 1) << " = " << values_.at(s.key) << '\n';
    }
    return os.str();
}

void RunConfig::validate() const {
    dynamics::parse_model(get("dynamics.model"));
    const auto form = get("dynamics.l8_form");
    if (form != "corrected" && form != "as_printed") {
        throw ConfigError("dynamics.l8_form must be corrected or as_printed");
    }
    convection_params(*this);
    trajectory_options(*this);
    mackey_glass_config(*this);
    for (const auto *k : {"dynamics.lyapunov_steps", "dynamics.lyapunov_transient", "dynamics.lyapunov_renorm"}) {
        (void)count(k);
    }
    if (!(number("dynamics.lyapunov_perturbation") > 0.0)) {
        throw ConfigError("dynamics.lyapunov_perturbation must be positive");
    }
    const auto kind = get("model.kind");
    if (kind != "qrcm" && kind != "crcm") {
        throw ConfigError("model.kind must be qrcm or crcm");
    }
    qrc_config(*this, 1).validate();
    crc_config(*this, 1).validate();
    const auto scen = get("training.scenario");
    if (scen != "closed_loop" && scen != "open_loop") {
        throw ConfigError("training.scenario must be closed_loop or open_loop");
    }
    (void)count("training.train_steps");
    (void)count("training.washout");
    if (!(number("training.gamma") >= 0.0)) {
        throw ConfigError("training.gamma must be >= 0");
    }
    (void)flag("training.normalize");
    (void)count("predict.steps");
    if (!(number("predict.lyapunov") >= 0.0) || !(number("predict.threshold") > 0.0)) {
        throw ConfigError("predict.lyapunov must be >= 0 and predict.threshold > 0");
    }
    if (get("sweep.scenario") != "opcount") {
        sweep_spec(*this).validate();
    }
    if (!(number("sweep.xi") > 0.0)) {
        throw ConfigError("sweep.xi must be positive");
    }
    (void)numbers("sweep.opcount_n");
}

std::string reference_text() {
    std::ostringstream os;
    std::size_t width = 0;
    for (const auto &s : key_specs()) {
        width = std::max(width, s.key.size() + s.default_value.size() + 3);
    }
    for (const auto &s : key_specs()) {
        std::string left = s.key + " = " + s.default_value;
        left.resize(width, ' ');
        os << "  " << left << "  " << s.help << '\n';
    }
    return os.str();
}

std::vector<double> parse_list(const std::string &text, const std::string &key) {
    std::vector<double> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const auto &item : split(text, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_double(item, key));
            continue;
        }
        const double lo = to_double(item.substr(0, dots), key);
        const double hi = to_double(item.substr(dots + 2), key);
        if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo || hi - lo > 1e6) {
            throw ConfigError("config key " + key + ": bad integer range '" + item + "'");
        }
        for (double v = lo; v <= hi; v += 1.0) {
            out.push_back(v);
        }
    }
    return out;
}

dynamics::ConvectionParams convection_params(const RunConfig &cfg) {
    auto p = dynamics::ConvectionParams::from_b(cfg.number("dynamics.sigma"), cfg.number("dynamics.r"),
                                                 cfg.number("dynamics.b"));
    p.l8_form = cfg.get("dynamics.l8_form") == "as_printed" ? dynamics::L8Form::AsPrinted : dynamics::L8Form::Corrected;
    return p;
}

dynamics::TrajectoryOptions trajectory_options(const RunConfig &cfg) {
    dynamics::TrajectoryOptions o;
    o.dt = cfg.number("dynamics.dt");
    if (!(o.dt > 0.0)) {
        throw ConfigError("dynamics.dt must be positive");
    }
    o.steps = cfg.count("dynamics.steps");
    o.transient = cfg.count("dynamics.transient");
    o.seed = cfg.count("dynamics.seed");
    return o;
}

dynamics::MackeyGlassConfig mackey_glass_config(const RunConfig &cfg) {
    dynamics::MackeyGlassConfig m;
    m.delay = cfg.number("dynamics.mg_delay");
    m.exponent = cfg.number("dynamics.mg_exponent");
    m.dt = cfg.number("dynamics.mg_dt");
    m.history = cfg.number("dynamics.mg_history");
    m.x0 = m.history;
    if (!(m.dt > 0.0) || !(m.delay > 0.0)) {
        throw ConfigError("Mackey-Glass delay and step must be positive");
    }
    return m;
}

reservoir::QrcConfig qrc_config(const RunConfig &cfg, std::size_t n_in) {
    const auto n = cfg.integer("model.n");
    if (n < 1 || n > 20) {
        throw ConfigError("model.n must lie in [1, 20]");
    }
    const double eps = cfg.number("model.eps");
    const auto seed = cfg.count("model.seed");
    auto q = cfg.flag("model.reduced")
                 ? reservoir::QrcConfig::make_reduced(static_cast<int>(n), eps, seed,
                                                      static_cast<int>(cfg.integer("model.n_selected")))
                 : reservoir::QrcConfig::make(static_cast<int>(n), eps, seed);
    q.shots = cfg.count("model.shots");
    q.input_scale = cfg.number("model.input_scale");
    q.block_size = static_cast<int>(cfg.integer("model.block_size"));
    q.noise.p_gate = cfg.number("model.p_gate");
    q.noise.p_meas = cfg.number("model.p_meas");
    q.noise.p_reset = cfg.number("model.p_reset");
    q.noise.max_trajectories = cfg.count("model.max_trajectories");
    q.normalization = {std::vector<double>(n_in, 0.0), std::vector<double>(n_in, 1.0)};
    return q;
}

reservoir::CrcConfig crc_config(const RunConfig &cfg, std::size_t n_in) {
    const auto n_res = cfg.integer("model.n_res");
    if (n_res < 1 || n_res > 20000) {
        throw ConfigError("model.n_res must lie in [1, 20000]");
    }
    return reservoir::CrcConfig::make(static_cast<int>(n_res), static_cast<int>(n_in), cfg.number("model.crc_eps"),
                                      cfg.number("model.density"), cfg.number("model.spectral_radius"),
                                      cfg.count("model.seed"));
}

experiments::SweepSpec sweep_spec(const RunConfig &cfg) {
    auto spec = experiments::SweepSpec::defaults(experiments::parse_scenario(cfg.get("sweep.scenario")));
    auto set_count = [&](const char *key, auto &field) {
        if (!cfg.is_auto(key)) {
            field = static_cast<std::remove_reference_t<decltype(field)>>(cfg.count(key));
        }
    };
    auto set_number = [&](const char *key, double &field) {
        if (!cfg.is_auto(key)) {
            field = cfg.number(key);
        }
    };
    set_count("sweep.seeds", spec.seeds);
    spec.base_seed = cfg.count("sweep.base_seed");
    set_count("sweep.data_seed", spec.data_seed);
    set_count("sweep.train_steps", spec.train_steps);
    set_count("sweep.washout", spec.washout);
    set_count("sweep.test_steps", spec.test_steps);
    set_count("sweep.transient", spec.transient);
    set_number("sweep.dt", spec.dt);
    set_count("sweep.shots", spec.shots);
    set_number("sweep.input_scale", spec.input_scale);
    set_number("sweep.lyapunov", spec.lyapunov);
    set_number("sweep.horizon_threshold", spec.horizon_threshold);
    set_number("sweep.crc_eps", spec.crc_eps);
    set_number("sweep.crc_density", spec.crc_density);
    set_number("sweep.crc_spectral_radius", spec.crc_spectral_radius);
    set_number("sweep.ridge_gamma", spec.ridge_gamma);
    set_count("sweep.n_selected", spec.n_selected);
    set_count("sweep.max_trajectories", spec.max_trajectories);
    const auto accepted = experiments::SweepSpec::grid_keys(spec.scenario);
    for (const auto &s : key_specs()) {
        if (s.key.rfind("grid.", 0) != 0 || cfg.is_auto(s.key)) {
            continue;
        }
        const auto name = s.key.substr(5);
        if (std::find(accepted.begin(), accepted.end(), name) == accepted.end()) {
            throw ConfigError("grid." + name + " is not used by scenario " + cfg.get("sweep.scenario"));
        }
        spec.grid[name] = cfg.numbers(s.key);
    }
    return spec;
}

void apply_seed_env(RunConfig &cfg) {
    const char *env = std::getenv("QRC_SEED");
    if (env == nullptr || *env == '\0') {
        return;
    }
    const std::string value = trim(env);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("QRC_SEED must be a non-negative integer, got '" + value + "'");
    }
    cfg.set("sweep.base_seed", value);
    cfg.set("model.seed", value);
    cfg.set("dynamics.seed", value);
}

} // namespace qrc::config
