#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace consensus {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

// Domain error codes; one per failure mode named in the module contracts.
enum class errc {
  self_loop,
  index_out_of_range,
  disconnected,
  isolated_vertex,
  unknown_topology,
  bad_size,
  empty_subset,
  induced_disconnected,
  eigen_solve_failure,
  non_positive_k,
  assumption_violation,
  not_a_fixed_point,
  dimension_mismatch,
  non_finite_state,
  order_precondition_violated,
  precondition_not_checked,
  not_an_equilibrium,
  not_nfse,
  not_odd,
  branch_lost,
  cohesion_not_met,
  config_parse_error,
  io_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace consensus
