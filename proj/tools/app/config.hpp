#pragma once

// Run configuration: flat `key = value` lines, `#` starts a comment.
//
//   problem.kind = heat1d | advdiff2d | transport1d
//   problem.nx / ny / nz / nd, problem.kappa / vx / vy / nu / q / length,
//   problem.sigma_t / sigma_s (comma lists), problem.source_lo / source_hi,
//   problem.blob_x / blob_y / blob_width, problem.x0_amplitude
//   time.dt, time.nt
//   params       = kappa, vx          names of the varied parameters
//   samples      = 0.5, 1; 1.0, 1     training points, ';' between points
//   test_params  = 0.75, 1            online points, same layout
//   rom.ns, rom.nt
//   svd.tol, svd.sv_tol, svd.max_rank, svd.at_max_rank = reinitialize | reject
//   ref_mode     = zero | initial_state
//   paths.out    = directory for artifacts and reports
//   seed, workers
//   run.repeats  = timing repetitions (median reported)
//   run.bounds   = auto | on | off
//   verify.perturb = offset added to one reduced space-time entry

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "strom/strom.hpp"

namespace strom::app {

/// Malformed configuration or command line; maps to the usage exit status.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BoundsMode { automatic, on, off };

struct RunConfig {
  ProblemSpec problem;
  double dt = 1e-3;
  std::size_t steps = 50;
  std::vector<std::string> param_names{"kappa"};
  std::vector<Vector> samples{{0.5}, {1.0}, {1.5}};
  std::vector<Vector> test_params{{0.75}};
  std::size_t n_s = 4;
  std::size_t n_t = 2;
  IsvdOptions svd;
  RefMode ref_mode = RefMode::initial_state;
  std::filesystem::path out = "strom_out";
  std::uint64_t seed = 20240601;
  std::size_t workers = 1;
  std::size_t repeats = 5;
  BoundsMode bounds = BoundsMode::automatic;
  double perturb = 0.0;

  TimeGrid grid() const { return TimeGrid::uniform(dt, steps); }
  ParamPoint point(const Vector& values) const;
  /// Range and consistency checks; throws UsageError.
  void validate() const;
};

/// The desk-scale advection-diffusion speedup experiment.
RunConfig desk_scale_config();

/// Parses config text over `base`; unknown keys and bad values throw UsageError.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// A `--param` value: either plain numbers in `param_names` order or
/// name=value pairs, comma separated.
Vector parse_param(const std::string& text, const std::vector<std::string>& names);

std::string describe(const ParamPoint& p);

}  // namespace strom::app
