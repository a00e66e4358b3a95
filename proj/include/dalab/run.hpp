#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dalab/config.hpp"
#include "dalab/experiments.hpp"

namespace dalab {

// One DA instance resolved from config. Members point into each other, so the
// instance is neither copied nor moved.
struct Instance {
    std::shared_ptr<const AnosovModel> model;
    std::unique_ptr<DAMap> g;
    std::unique_ptr<ShadowField> field;
    std::unique_ptr<Holonomy> holonomy;

    Instance() = default;
    Instance(const Instance&) = delete;
    Instance& operator=(const Instance&) = delete;
};

std::unique_ptr<Instance> make_instance(const RunConfig& cfg);

const std::vector<std::string>& experiment_names();
ExperimentReport run_experiment(const std::string& name, const RunConfig& cfg, const Instance& inst);

// Deterministic JSON: no timestamps, sorted keys, series referenced by file name.
std::string report_to_json(const ExperimentReport& r, const RunConfig& cfg);
std::string series_to_csv(const Series& s);
void write_atomic(const std::string& path, const std::string& content);

int run_cli(int argc, char** argv);

}  // namespace dalab
