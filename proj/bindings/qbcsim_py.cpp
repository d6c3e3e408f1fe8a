// Python bindings for the simulator core: configuration, precomputed screen
// patterns, the statistics toolbox, decay helpers, and the batch drivers.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbcsim/config.hpp"
#include "qbcsim/decay.hpp"
#include "qbcsim/harness.hpp"
#include "qbcsim/patterns.hpp"
#include "qbcsim/stats.hpp"

namespace py = pybind11;

namespace {

std::vector<double> pattern_positions(const qbc::ScreenPattern& pattern) {
  std::vector<double> xs(pattern.grid.n_points);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = pattern.grid.x(i);
  return xs;
}

}  // namespace

PYBIND11_MODULE(_qbcsim, m) {
  m.doc() =
      "Neutron double-slit bit-commitment simulator: wave-packet engine, "
      "decay model, protocol drivers, and verifier statistics";

  py::class_<qbc::ProtocolConfig>(m, "ProtocolConfig")
      .def(py::init<>())
      .def_readwrite("wavelength", &qbc::ProtocolConfig::wavelength)
      .def_readwrite("slit_width", &qbc::ProtocolConfig::slit_width)
      .def_readwrite("slit_separation", &qbc::ProtocolConfig::slit_separation)
      .def_readwrite("screen_distance", &qbc::ProtocolConfig::screen_distance)
      .def_readwrite("sigma0", &qbc::ProtocolConfig::sigma0)
      .def_readwrite("edge_softness", &qbc::ProtocolConfig::edge_softness)
      .def_readwrite("mass", &qbc::ProtocolConfig::mass)
      .def_readwrite("tau", &qbc::ProtocolConfig::tau)
      .def_readwrite("grid_points", &qbc::ProtocolConfig::grid_points)
      .def_readwrite("grid_halfwidth", &qbc::ProtocolConfig::grid_halfwidth)
      .def_readwrite("trials", &qbc::ProtocolConfig::trials)
      .def_readwrite("t0", &qbc::ProtocolConfig::t0)
      .def_readwrite("t1", &qbc::ProtocolConfig::t1)
      .def_readwrite("commit_end", &qbc::ProtocolConfig::commit_end)
      .def_readwrite("unveil_time", &qbc::ProtocolConfig::unveil_time)
      .def_readwrite("epsilon_v", &qbc::ProtocolConfig::epsilon_v)
      .def_readwrite("both_prob", &qbc::ProtocolConfig::both_prob)
      .def_readwrite("alpha_override", &qbc::ProtocolConfig::alpha_override)
      .def_readwrite("measure_time", &qbc::ProtocolConfig::measure_time)
      .def_readwrite("announce_fraction", &qbc::ProtocolConfig::announce_fraction)
      .def("finalize", &qbc::ProtocolConfig::finalize)
      .def("momentum", &qbc::ProtocolConfig::momentum)
      .def("velocity", &qbc::ProtocolConfig::velocity)
      .def("flight_time", &qbc::ProtocolConfig::flight_time)
      .def("fringe_spacing", &qbc::ProtocolConfig::fringe_spacing)
      .def("envelope_halfwidth", &qbc::ProtocolConfig::envelope_halfwidth)
      .def("canonical_string", &qbc::ProtocolConfig::canonical_string)
      .def("hash", &qbc::ProtocolConfig::hash);

  m.def("parse_config_text", &qbc::parse_config_text,
        "Parse `key = value` config text into a finalized ProtocolConfig");
  m.def("load_config_file", &qbc::load_config_file);

  py::class_<qbc::ScreenPattern>(m, "ScreenPattern")
      .def_property_readonly("positions", &pattern_positions)
      .def_readonly("intensity", &qbc::ScreenPattern::intensity)
      .def_readonly("total_weight", &qbc::ScreenPattern::total_weight)
      .def("bin_probability", &qbc::ScreenPattern::bin_probability);

  py::class_<qbc::PatternSet>(m, "PatternSet")
      .def_readonly("alpha_both", &qbc::PatternSet::alpha_both)
      .def_readonly("alpha_left", &qbc::PatternSet::alpha_left)
      .def_readonly("alpha_right", &qbc::PatternSet::alpha_right)
      .def_readonly("p_left_given_both", &qbc::PatternSet::p_left_given_both)
      .def_readonly("screen_both", &qbc::PatternSet::screen_both)
      .def_readonly("screen_left", &qbc::PatternSet::screen_left)
      .def_readonly("screen_right", &qbc::PatternSet::screen_right)
      .def_readonly("screen_mix", &qbc::PatternSet::screen_mix)
      .def_readonly("max_displacement", &qbc::PatternSet::max_displacement)
      .def_readonly("wrap_ok", &qbc::PatternSet::wrap_ok);

  m.def("compute_patterns", &qbc::compute_patterns,
        "Post-aperture states, transmissions, and screen patterns for a config",
        py::arg("cfg"));

  // Statistics toolbox.
  m.def("chi_square_sf", &qbc::chi_square_sf, py::arg("x"), py::arg("k"));
  m.def("binomial_two_sided", &qbc::binomial_two_sided, py::arg("successes"),
        py::arg("n"), py::arg("p0"));
  m.def("fringe_contrast", &qbc::fringe_contrast, py::arg("pattern"),
        py::arg("window_lo"), py::arg("window_hi"));
  m.def("measure_fringe_spacing", &qbc::measure_fringe_spacing, py::arg("pattern"),
        py::arg("min_height") = 0.3);
  m.def("pattern_sd", &qbc::pattern_sd, py::arg("pattern"));

  // Decay model.
  m.def(
      "survival_probability",
      [](double t, double tau) { return qbc::survival_probability(t, {tau}); },
      py::arg("t"), py::arg("tau"));
  m.def(
      "surviving_count",
      [](double N, double alpha, double T, double tau) {
        return qbc::surviving_count(N, alpha, T, {tau});
      },
      py::arg("N"), py::arg("alpha"), py::arg("T"), py::arg("tau"));

  py::class_<qbc::QuantileTable>(m, "QuantileTable")
      .def(py::init<>())
      .def_readwrite("config_hash", &qbc::QuantileTable::config_hash)
      .def_readwrite("sessions", &qbc::QuantileTable::sessions)
      .def_readwrite("seed", &qbc::QuantileTable::seed)
      .def_readwrite("z_threshold", &qbc::QuantileTable::z_threshold)
      .def_readwrite("llr_threshold", &qbc::QuantileTable::llr_threshold);

  m.def("calibrate_quantiles", &qbc::calibrate_quantiles, py::arg("cfg"),
        py::arg("patterns"), py::arg("sessions"), py::arg("seed"),
        "Monte Carlo thresholds for the verifier's two pattern statistics");

  py::class_<qbc::BatchCounters>(m, "BatchCounters")
      .def_readonly("sessions", &qbc::BatchCounters::sessions)
      .def_readonly("accepts", &qbc::BatchCounters::accepts)
      .def_readonly("test_failures", &qbc::BatchCounters::test_failures)
      .def("accept_rate", &qbc::BatchCounters::accept_rate)
      .def("detected_fraction_mean", &qbc::BatchCounters::detected_fraction_mean);

  m.def(
      "run_honest_batch",
      [](int bit, const qbc::ProtocolConfig& cfg, const qbc::PatternSet& patterns,
         const std::optional<qbc::QuantileTable>& quantiles, std::uint64_t seed,
         std::uint64_t sessions) {
        return qbc::run_honest_batch(bit, cfg, patterns, quantiles, seed, sessions);
      },
      py::arg("bit"), py::arg("cfg"), py::arg("patterns"), py::arg("quantiles"),
      py::arg("seed"), py::arg("sessions"));

  m.def(
      "run_bitflip_batch",
      [](int committed_bit, const qbc::ProtocolConfig& cfg,
         const qbc::PatternSet& patterns,
         const std::optional<qbc::QuantileTable>& quantiles, std::uint64_t seed,
         std::uint64_t sessions) {
        return qbc::run_bitflip_batch(committed_bit, cfg, patterns, quantiles, seed,
                                      sessions);
      },
      py::arg("committed_bit"), py::arg("cfg"), py::arg("patterns"),
      py::arg("quantiles"), py::arg("seed"), py::arg("sessions"));

  py::class_<qbc::DelayedBatchReport>(m, "DelayedBatchReport")
      .def_readonly("counters", &qbc::DelayedBatchReport::counters)
      .def_readonly("missing_fraction_mean",
                    &qbc::DelayedBatchReport::missing_fraction_mean)
      .def_readonly("width_ratio", &qbc::DelayedBatchReport::width_ratio);

  m.def(
      "run_delayed_batch",
      [](int unveil_bit, const qbc::ProtocolConfig& cfg,
         const qbc::PatternSet& patterns,
         const std::optional<qbc::QuantileTable>& quantiles, std::uint64_t seed,
         std::uint64_t sessions) {
        return qbc::run_delayed_batch(unveil_bit, cfg, patterns, quantiles, seed,
                                      sessions);
      },
      py::arg("unveil_bit"), py::arg("cfg"), py::arg("patterns"),
      py::arg("quantiles"), py::arg("seed"), py::arg("sessions"));

  py::class_<qbc::ConcealingReport>(m, "ConcealingReport")
      .def_readonly("sessions", &qbc::ConcealingReport::sessions)
      .def_readonly("paired_seeds", &qbc::ConcealingReport::paired_seeds)
      .def_readonly("tv_raw", &qbc::ConcealingReport::tv_raw)
      .def_readonly("tv_bias", &qbc::ConcealingReport::tv_bias)
      .def_readonly("tv_debiased", &qbc::ConcealingReport::tv_debiased)
      .def_readonly("perm_p_value", &qbc::ConcealingReport::perm_p_value)
      .def_readonly("ci_lo", &qbc::ConcealingReport::ci_lo)
      .def_readonly("ci_hi", &qbc::ConcealingReport::ci_hi)
      .def_readonly("max_marginal_gap", &qbc::ConcealingReport::max_marginal_gap)
      .def_readonly("schema_identical", &qbc::ConcealingReport::schema_identical);

  m.def("concealing_probe", &qbc::concealing_probe, py::arg("cfg"),
        py::arg("patterns"), py::arg("seed"), py::arg("sessions"),
        py::arg("paired_seeds") = false,
        "Total-variation probe of Bob's pre-unveil view for b=0 versus b=1");

  m.def(
      "run_experiment",
      [](const std::string& subcommand, const qbc::ProtocolConfig& cfg,
         std::uint64_t seed, std::uint64_t sessions, int bit,
         const std::string& out_dir, const std::string& calib_dir,
         std::uint64_t calib_sessions, bool paired_seeds, bool dump_sessions) {
        qbc::ExperimentRequest request;
        request.subcommand = subcommand;
        request.cfg = cfg;
        request.seed = seed;
        request.sessions = sessions;
        request.bit = bit;
        request.out_dir = out_dir;
        request.calib_dir = calib_dir;
        request.calib_sessions = calib_sessions;
        request.paired_seeds = paired_seeds;
        request.dump_sessions = dump_sessions;
        const qbc::ExperimentResult result = qbc::run_experiment(request);
        return py::make_tuple(result.run_dir, result.metrics.dump());
      },
      py::arg("subcommand"), py::arg("cfg"), py::arg("seed") = 1,
      py::arg("sessions") = 1000, py::arg("bit") = 1, py::arg("out_dir") = "out",
      py::arg("calib_dir") = "calibration", py::arg("calib_sessions") = 10000,
      py::arg("paired_seeds") = false, py::arg("dump_sessions") = false,
      "Run one experiment subcommand; returns (run_dir, metrics JSON text)");
}
