#include "smal_cli/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smal/errors.hpp"

namespace smal::cli {

using nlohmann::json;

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& required, const std::set<std::string>& optional) {
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!required.count(key) && !optional.count(key)) {
            throw ValidationError("unknown config key '" + where + "." + key + "'");
        }
    }
    for (const auto& key : required) {
        if (!obj.contains(key)) {
            throw ValidationError("missing config key '" + where + "." + key + "'");
        }
    }
}

double number(const json& obj, const std::string& where, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError("config key '" + where + "." + key + "' must be a number");
    return v.get<double>();
}

Vec3 vec3(const json& obj, const std::string& where, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) {
        throw ValidationError("config key '" + where + "." + key + "' must be a 3-array");
    }
    return {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
}

magnetics::MagnetSpec parse_magnet(const json& obj, const std::string& where) {
    require_keys(obj, where, {"shape", "remanence"},
                 {"diameter", "outer_diameter", "inner_diameter", "length"});
    const std::string shape = obj.at("shape").get<std::string>();
    if (shape == "sphere") {
        require_keys(obj, where, {"shape", "remanence", "diameter"}, {});
        return magnetics::MagnetSpec::sphere(number(obj, where, "diameter"),
                                             number(obj, where, "remanence"));
    }
    if (shape == "ring") {
        require_keys(obj, where, {"shape", "remanence", "outer_diameter", "inner_diameter", "length"},
                     {});
        return magnetics::MagnetSpec::ring(
            number(obj, where, "outer_diameter"), number(obj, where, "inner_diameter"),
            number(obj, where, "length"), number(obj, where, "remanence"));
    }
    throw ValidationError(where + ".shape must be 'sphere' or 'ring'");
}

}  // namespace

sim::SimConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config JSON parse error: ") + e.what());
    }

    require_keys(doc, "config",
                 {"grid", "path", "control", "resistance", "magnets", "cadences", "seed",
                  "duration_max", "mode"},
                 {"tracker", "init_error"});

    sim::SimConfig cfg;

    const auto& g = doc.at("grid");
    require_keys(g, "grid", {"nx", "ny", "spacing", "origin", "noise_sigma"}, {});
    cfg.grid.nx = g.at("nx").get<int>();
    cfg.grid.ny = g.at("ny").get<int>();
    cfg.grid.spacing = number(g, "grid", "spacing");
    cfg.grid.origin = vec3(g, "grid", "origin");
    cfg.grid.noise_sigma = number(g, "grid", "noise_sigma");

    const auto& p = doc.at("path");
    require_keys(p, "path", {"start", "tube_inner_diameter", "segments"}, {});
    cfg.path = env::TubePath::from_json_text(p.dump());

    const auto& c = doc.at("control");
    require_keys(c, "control",
                 {"alpha_high_deg", "alpha_low_deg", "v_threshold", "delta_t", "standoff",
                  "spin_rate_hz"},
                 {});
    cfg.control.alpha_high = deg_to_rad(number(c, "control", "alpha_high_deg"));
    cfg.control.alpha_low = deg_to_rad(number(c, "control", "alpha_low_deg"));
    cfg.control.v_threshold = number(c, "control", "v_threshold");
    cfg.control.delta_t = number(c, "control", "delta_t");
    cfg.control.standoff = number(c, "control", "standoff");
    cfg.control.spin_rate = 2.0 * kPi * number(c, "control", "spin_rate_hz");

    const auto& r = doc.at("resistance");
    require_keys(r, "resistance", {"static_threshold", "curvature_gain", "viscous_coeff"}, {});
    cfg.resistance.static_threshold = number(r, "resistance", "static_threshold");
    cfg.resistance.curvature_gain = number(r, "resistance", "curvature_gain");
    cfg.resistance.viscous_coeff = number(r, "resistance", "viscous_coeff");

    const auto& m = doc.at("magnets");
    require_keys(m, "magnets", {"actuator", "capsule"}, {});
    cfg.actuator_magnet = parse_magnet(m.at("actuator"), "magnets.actuator");
    cfg.capsule_magnet = parse_magnet(m.at("capsule"), "magnets.capsule");

    const auto& cad = doc.at("cadences");
    require_keys(cad, "cadences", {"sensor_rate", "control_rate", "physics_dt"}, {});
    cfg.cadences.sensor_rate = number(cad, "cadences", "sensor_rate");
    cfg.cadences.control_rate = number(cad, "cadences", "control_rate");
    cfg.cadences.physics_dt = number(cad, "cadences", "physics_dt");

    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.duration_max = number(doc, "config", "duration_max");

    const auto& mode = doc.at("mode");
    require_keys(mode, "mode", {"type"}, {"alpha_deg"});
    const std::string type = mode.at("type").get<std::string>();
    if (type == "adaptive") {
        cfg.mode = sim::DriveMode::Adaptive;
    } else if (type == "fixed_alpha") {
        require_keys(mode, "mode", {"type", "alpha_deg"}, {});
        cfg.mode = sim::DriveMode::FixedAlpha;
        cfg.fixed_alpha = deg_to_rad(number(mode, "mode", "alpha_deg"));
    } else {
        throw ValidationError("mode.type must be 'adaptive' or 'fixed_alpha'");
    }

    if (doc.contains("tracker")) {
        const auto& t = doc.at("tracker");
        require_keys(t, "tracker", {}, {"buffer_length", "min_sweep_deg"});
        if (t.contains("buffer_length")) cfg.tracker.buffer_length = t.at("buffer_length").get<int>();
        if (t.contains("min_sweep_deg")) {
            cfg.tracker.min_sweep = deg_to_rad(number(t, "tracker", "min_sweep_deg"));
        }
    }
    if (doc.contains("init_error")) {
        const auto& e = doc.at("init_error");
        require_keys(e, "init_error", {}, {"position", "angle_deg"});
        if (e.contains("position")) cfg.init_position_error = number(e, "init_error", "position");
        if (e.contains("angle_deg")) {
            cfg.init_angle_error = deg_to_rad(number(e, "init_error", "angle_deg"));
        }
    }

    cfg.validate();
    return cfg;
}

sim::SimConfig load_config(const std::filesystem::path& file) {
    return parse_config(read_file(file));
}

}  // namespace smal::cli
