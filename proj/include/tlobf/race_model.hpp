#pragma once

#include <cstdint>
#include <span>

#include <tlobf/obfuscate.hpp>
#include <tlobf/tlg_map.hpp>

namespace tlobf
{

/*! \brief Magnitude of a pMOS threshold voltage distribution, in volts. */
struct vt_distribution
{
  double mean = 0.0;
  double sigma = 0.0;
};

/*! \brief Supply, Vt classes and calibration currents (microamperes). */
struct device_params
{
  double vdd = 1.1;
  vt_distribution lvt{ 0.280, 0.0195 };
  vt_distribution svt{ 0.433, 0.0228 };
  vt_distribution hvt{ 0.604, 0.0217 };
  double i_low = 15.3;
  double i_high = 4.54;
};

/*! \brief Alpha-power drain current I = k * (Vdd - |Vt|)^alpha, in microamperes. */
struct current_model
{
  double vdd = 1.1;
  double alpha = 0.0;
  double k = 0.0;

  /*! \brief Zero below cutoff. */
  double current( double abs_vt ) const;
};

/*! \brief Fit through (|Vt1|, I1) and (|Vt2|, I2); throws `contract_error` on degenerate points. */
current_model calibrate_current_model( double vdd, double vt1, double i1, double vt2, double i2 );
/*! \brief Fit through the low-Vt and high-Vt calibration points. */
current_model calibrate_current_model( device_params const& params );

/*! \brief Left minus right conducting current with low slots at `i_low` and high slots at `i_high`.

  `values` range over `spec.inputs`, decoy nets included.  Zero means a tie.
*/
double static_margin( differential_spec const& spec, std::span<const uint8_t> values, double i_low, double i_high );
double static_margin( differential_spec const& spec, std::span<const uint8_t> values, device_params const& params );

struct safety_report
{
  bool safe = true;
  uint32_t max_safe_k = 0;
  /*! \brief One-unit logical margin minus all decoys of one side conducting against it. */
  double worst_margin = 0.0;
};

/*! \brief Safe iff k * i_high < i_low; `max_safe_k` = ceil(i_low / i_high) - 1. */
safety_report safety_check( cell_variant const& variant, device_params const& params );

struct yield_params
{
  uint64_t trials = 10000u;
  uint64_t seed = 1u;
  double sigma_scale = 1.0;
  uint32_t threads = 1u;
};

struct yield_result
{
  uint64_t trials = 0;
  uint64_t passes = 0;
  double yield = 0.0;
  double ci_low = 0.0;  /*!< Wilson 95% interval */
  double ci_high = 0.0;
  /*! \brief Smallest current margin in the direction of the ideal output over all trials and inputs. */
  double min_margin = 0.0;
};

/*! \brief Wilson score interval at 95% confidence. */
std::pair<double, double> wilson_interval( uint64_t passes, uint64_t trials );

/*! \brief Monte Carlo functional yield of one cell.

  `spec` carries the real Vt classes.  Each trial samples every slot's |Vt|
  from its class (low slots LVT, high slots HVT, sigma scaled by
  `sigma_scale`) and passes iff the current comparison agrees with the ideal
  output on every assignment of `spec.inputs`.  Trial i uses a generator
  derived from (seed, i) only.
*/
yield_result monte_carlo_yield( differential_spec const& spec, device_params const& params, yield_params const& yp );

} // namespace tlobf
