#pragma once

#include "dtmon/config.hpp"
#include "dtmon/sim.hpp"

#ifndef DTMON_SOURCE_DIR
#error "DTMON_SOURCE_DIR must point at the repository root"
#endif

namespace shared {

inline std::filesystem::path source_dir() { return DTMON_SOURCE_DIR; }

inline const dtmon::RunConfig& default_config() {
    static const dtmon::RunConfig cfg = dtmon::load_config(source_dir() / "configs" / "default.toml");
    return cfg;
}

// Training set of the default configuration, generated once per process.
inline const dtmon::Dataset& training_data() {
    static const dtmon::Dataset d = [] {
        const auto& c = default_config();
        return dtmon::generate_training_data(dtmon::training_scenarios(c.datagen, c.monitor, c.seed),
                                             c.datagen.labeling_horizon, c.monitor.lanes,
                                             c.datagen.sample_range);
    }();
    return d;
}

} // namespace shared
