#include "turbmt/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace turbmt::cfg {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
}

template <typename T>
void get(const json& obj, const char* key, T& dst) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            dst = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config: bad value for \"") + key + "\"");
        }
    }
}

}  // namespace

void RunConfig::validate() const {
    const auto& t = turbulence;
    if (t.frames < 1 || t.height < 8 || t.width < 8)
        throw ConfigError("config: turbulence dims out of range");
    if (t.modes < 2 || t.modes > 64)
        throw ConfigError("config: turbulence.modes must be in [2, 64]");
    if (!(t.variance >= 0.0)) throw ConfigError("config: variance must be >= 0");
    if (!t.mode_variances.empty() && static_cast<int>(t.mode_variances.size()) != t.modes)
        throw ConfigError("config: mode_variances length must equal modes");
    for (double v : t.mode_variances)
        if (!(v >= 0.0)) throw ConfigError("config: mode_variances must be >= 0");
    if (!(t.spatial_correlation_length > 0.0))
        throw ConfigError("config: spatial_correlation_length must be > 0");
    if (!(t.temporal_correlation >= 0.0 && t.temporal_correlation < 1.0))
        throw ConfigError("config: temporal_correlation must be in [0, 1)");
    if (!(t.kernel_size_norm >= 0.0 && t.kernel_size_norm <= 1.0))
        throw ConfigError("config: kernel_size_norm must be in [0, 1]");
    if (!(t.noise_sigma >= 0.0)) throw ConfigError("config: noise_sigma must be >= 0");
    if (!(t.aperture_ratio > 0.0 && t.aperture_ratio <= 1.0))
        throw ConfigError("config: aperture_ratio must be in (0, 1]");
    if (t.basis_grid < 8) throw ConfigError("config: basis_grid must be >= 8");
    if (basis.rank < 1) throw ConfigError("config: basis.rank must be >= 1");
    if (basis.samples < 1) throw ConfigError("config: basis.samples must be >= 1");
    if (ssm.state_dim < 1 || ssm.length < 1 || ssm.chunk < 1)
        throw ConfigError("config: ssm values must be >= 1");
    if (scan.order != "space_first" && scan.order != "time_first" &&
        scan.order != "local_hilbert")
        throw ConfigError("config: scan.order must be space_first, time_first, or local_hilbert");
    if (scan.block < 1) throw ConfigError("config: scan.block must be >= 1");
    if (invert.steps < 1) throw ConfigError("config: invert.steps must be >= 1");
    if (!(invert.step_size > 0.0)) throw ConfigError("config: invert.step_size must be > 0");
}

std::vector<double> RunConfig::mode_variance_vector() const {
    if (!turbulence.mode_variances.empty()) return turbulence.mode_variances;
    return std::vector<double>(turbulence.modes, turbulence.variance);
}

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(root, {"turbulence", "basis", "ssm", "scan", "loss", "invert"}, "top level");

    RunConfig c;
    if (auto it = root.find("turbulence"); it != root.end()) {
        reject_unknown(*it,
                       {"frames", "height", "width", "modes", "variance", "mode_variances",
                        "spatial_correlation_length", "temporal_correlation",
                        "kernel_size_norm", "noise_sigma", "aperture_ratio", "basis_grid",
                        "seed"},
                       "turbulence");
        auto& t = c.turbulence;
        get(*it, "frames", t.frames);
        get(*it, "height", t.height);
        get(*it, "width", t.width);
        get(*it, "modes", t.modes);
        get(*it, "variance", t.variance);
        get(*it, "mode_variances", t.mode_variances);
        get(*it, "spatial_correlation_length", t.spatial_correlation_length);
        get(*it, "temporal_correlation", t.temporal_correlation);
        get(*it, "kernel_size_norm", t.kernel_size_norm);
        get(*it, "noise_sigma", t.noise_sigma);
        get(*it, "aperture_ratio", t.aperture_ratio);
        get(*it, "basis_grid", t.basis_grid);
        get(*it, "seed", t.seed);
    }
    if (auto it = root.find("basis"); it != root.end()) {
        reject_unknown(*it, {"rank", "samples"}, "basis");
        get(*it, "rank", c.basis.rank);
        get(*it, "samples", c.basis.samples);
    }
    if (auto it = root.find("ssm"); it != root.end()) {
        reject_unknown(*it, {"state_dim", "length", "chunk"}, "ssm");
        get(*it, "state_dim", c.ssm.state_dim);
        get(*it, "length", c.ssm.length);
        get(*it, "chunk", c.ssm.chunk);
    }
    if (auto it = root.find("scan"); it != root.end()) {
        reject_unknown(*it, {"order", "block"}, "scan");
        get(*it, "order", c.scan.order);
        get(*it, "block", c.scan.block);
    }
    if (auto it = root.find("loss"); it != root.end()) {
        reject_unknown(*it, {"alpha", "alpha_p", "alpha_k"}, "loss");
        get(*it, "alpha", c.loss.alpha);
        get(*it, "alpha_p", c.loss.alpha_p);
        get(*it, "alpha_k", c.loss.alpha_k);
    }
    if (auto it = root.find("invert"); it != root.end()) {
        reject_unknown(*it, {"steps", "step_size"}, "invert");
        get(*it, "steps", c.invert.steps);
        get(*it, "step_size", c.invert.step_size);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

}  // namespace turbmt::cfg
