#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gselab/chaos.hpp"
#include "gselab/classical_solution.hpp"
#include "gselab/phase_geometry.hpp"
#include "gselab/propagator.hpp"

namespace gselab {

struct ChaosConfig {
    double T = 1000.0;
    double dt = 0.005;
    std::size_t renorm_every = 20;
    double delta0 = 1e-9;
    PhasePoint dz{1e-9, 0.0};
    double divergence_t_final = 0.0;  // 0 disables the divergence series
    double divergence_sample_dt = 0.5;
    DivergenceEngine engine = DivergenceEngine::closed_form;

    bool operator==(const ChaosConfig&) const = default;
};

struct PhaseScanConfig {
    std::vector<PhasePoint> initial_conditions;
    double t_span = 10.0;
    std::size_t n_samples = 65537;
    double closure_tol = 1e-6;

    bool operator==(const PhaseScanConfig&) const = default;
};

/// A fully resolved run description; the unit the CLI consumes and the unit
/// every output file's header reproduces.
struct Scenario {
    std::string name = "scenario";
    ModelConstants constants;
    DrivenHamiltonian hamiltonian;
    EnvelopeSpec envelope;
    PhasePoint z0{0.0, 0.0};
    GridSpec grid{1024, -10.0, 10.0};
    PropagationConfig propagation;
    double t_final = 1.0;
    std::vector<double> lambda_list;
    std::optional<ChaosConfig> chaos;
    std::optional<PhaseScanConfig> phase_scan;
    unsigned seed = 0;
};

Scenario parse_scenario_json(const std::string& text);
Scenario load_scenario(const std::string& path);

/// One-line JSON form of the resolved scenario; parse_scenario_json inverts it.
std::string scenario_to_json(const Scenario& s);

bool scenario_equivalent(const Scenario& a, const Scenario& b);

/// Reads the "# config ..." header line back out of an output file.
Scenario read_config_header(std::istream& is);

/// Checks that the grid box contains the classical sweep of the scenario plus
/// the envelope margin, by a pre-run classical integration. Throws ConfigError.
void validate_scenario_box(const Scenario& s);

/// Subcommand drivers. All files are CSV/text with a resolved-config header.
void run_quantize(const Scenario& s, const std::string& output_dir, std::ostream& console);
void run_evolve(const Scenario& s, const std::string& output_dir, bool emit_plot_data);
void run_closed_form(const Scenario& s, const std::string& output_dir);
void run_compare(const Scenario& s, const std::string& output_dir);
void run_phase(const Scenario& s, const std::string& output_dir);
void run_chaos(const Scenario& s, const std::string& output_dir);
void run_sweep_lambda(const Scenario& s, const std::string& output_dir);

/// Worker cap for sweep fan-out: GSELAB_MAX_PARALLEL, else hardware size.
unsigned max_parallel();

}  // namespace gselab
