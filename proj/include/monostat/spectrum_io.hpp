#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "monostat/errors.hpp"
#include "monostat/spectrum.hpp"

namespace monostat {

/// Parses a spectrum document of the form
///   {"levels":[{"energy":Number,"degeneracy":Int},...],
///    "tail":{"ratio_energy":Number}|{"complete":true}|null}
/// "ratio_energy" is the spacing of omitted levels; optional keys
/// "first_energy", "first_weight" and "weight_ratio" refine the tail
/// majorant. A null tail yields an uncertified spectrum. Violations are
/// reported with the offending field path.
inline Spectrum spectrum_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw spectrum_parse_error("document", e.what());
    }

    if (!doc.is_object()) throw spectrum_parse_error("document", "expected a JSON object");
    if (!doc.contains("levels") || !doc["levels"].is_array())
        throw spectrum_parse_error("levels", "required array missing");

    std::vector<EnergyLevel> levels;
    double prev = -1.0;
    for (std::size_t i = 0; i < doc["levels"].size(); ++i) {
        const std::string where = "levels[" + std::to_string(i) + "]";
        const auto& entry = doc["levels"][i];
        if (!entry.is_object()) throw spectrum_parse_error(where, "expected an object");
        if (!entry.contains("energy") || !entry["energy"].is_number())
            throw spectrum_parse_error(where + ".energy", "required number missing");
        if (!entry.contains("degeneracy") || !entry["degeneracy"].is_number_integer())
            throw spectrum_parse_error(where + ".degeneracy", "required integer missing");
        const double energy = entry["energy"].get<double>();
        const std::int64_t deg = entry["degeneracy"].get<std::int64_t>();
        if (!(energy >= 0.0))
            throw spectrum_parse_error(where + ".energy", "must be >= 0");
        if (!(energy > prev))
            throw spectrum_parse_error(where + ".energy",
                                       "must exceed the previous level (strictly increasing)");
        if (deg < 1) throw spectrum_parse_error(where + ".degeneracy", "must be >= 1");
        levels.push_back({energy, static_cast<std::uint64_t>(deg)});
        prev = energy;
    }
    if (levels.empty()) throw spectrum_parse_error("levels", "must contain at least one level");

    if (!doc.contains("tail") || doc["tail"].is_null())
        return Spectrum::uncertified(std::move(levels));

    const auto& tail = doc["tail"];
    if (!tail.is_object()) throw spectrum_parse_error("tail", "expected an object or null");
    if (tail.contains("complete")) {
        if (!tail["complete"].is_boolean() || !tail["complete"].get<bool>())
            throw spectrum_parse_error("tail.complete", "must be true when present");
        return Spectrum::complete(std::move(levels));
    }
    if (!tail.contains("ratio_energy") || !tail["ratio_energy"].is_number())
        throw spectrum_parse_error("tail.ratio_energy", "required number missing");

    GeometricTail g;
    g.energy_gap = tail["ratio_energy"].get<double>();
    if (!(g.energy_gap > 0.0))
        throw spectrum_parse_error("tail.ratio_energy", "must be > 0");
    g.first_energy = levels.back().energy + g.energy_gap;
    if (tail.contains("first_energy")) g.first_energy = tail["first_energy"].get<double>();
    if (tail.contains("first_weight")) g.first_weight = tail["first_weight"].get<double>();
    if (tail.contains("weight_ratio")) g.weight_ratio = tail["weight_ratio"].get<double>();
    if (!(g.first_energy > levels.back().energy))
        throw spectrum_parse_error("tail.first_energy",
                                   "must exceed the last retained energy");
    return Spectrum::truncated(std::move(levels), g);
}

} // namespace monostat
