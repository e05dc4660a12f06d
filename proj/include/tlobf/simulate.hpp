#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <tlobf/netlist.hpp>
#include <tlobf/obfuscate.hpp>

namespace tlobf
{

using stimulus = std::vector<std::vector<uint8_t>>;

/*! \brief Switching activity gathered during simulation. */
struct activity
{
  uint64_t cycles = 0;
  std::vector<uint64_t> toggles;          /*!< per net, against the previous cycle */
  std::vector<uint64_t> tlg_evaluations;  /*!< per threshold cell instance */
  std::vector<uint64_t> tlg_evals_per_cycle;
};

/*! \brief Two-valued cycle-based simulator with reset-to-0 state.

  Each `step` applies one input vector (ordered as `data_inputs`), evaluates
  the combinational logic, returns the outputs and then clocks every flop and
  sequential threshold cell.  Obfuscated cells need an entry in `key`.
*/
class simulator
{
public:
  simulator( netlist const& nl, obfuscation_key const* key = nullptr );

  void reset();
  std::vector<uint8_t> step( std::span<const uint8_t> inputs );

  std::vector<uint8_t> const& values() const noexcept { return values_; }
  struct activity const& activity() const noexcept { return activity_; }
  uint32_t num_inputs() const noexcept { return static_cast<uint32_t>( inputs_.size() ); }

private:
  struct cell
  {
    differential_spec spec;
    std::vector<net_id> nets;
  };

  bool eval_cell( uint32_t index );

  netlist const& nl_;
  std::vector<net_id> inputs_;
  std::vector<driver> order_;
  std::vector<cell> cells_;
  std::vector<uint8_t> values_;
  std::vector<uint8_t> previous_;
  std::vector<uint8_t> state_; /*!< flops, then threshold cells */
  std::vector<uint8_t> scratch_;
  struct activity activity_;
};

struct sim_trace
{
  std::vector<std::string> output_names;
  stimulus outputs;
  struct activity activity;
};

sim_trace simulate( netlist const& nl, obfuscation_key const* key, stimulus const& inputs );

/*! \brief Uniform first vector, then every bit flips with `toggle_probability` per cycle. */
stimulus random_activity_stimulus( uint32_t width, uint64_t cycles, double toggle_probability, uint64_t seed );
/*! \brief Uniformly random vectors. */
stimulus random_stimulus( uint32_t width, uint64_t cycles, uint64_t seed );
/*! \brief Measured fraction of bit flips between consecutive vectors. */
double toggle_rate( stimulus const& s );

/*! \brief Longest chain of sequential elements from an input to an output. */
uint32_t sequential_depth( netlist const& nl );

enum class equivalence_mode
{
  exhaustive,
  random
};

struct equivalence_params
{
  equivalence_mode mode = equivalence_mode::random;
  uint64_t vectors = 100000u;
  uint64_t seed = 1u;
  /*! \brief Upper bound on exhaustive stimulus length. */
  uint64_t max_cycles = uint64_t{ 1 } << 20;
};

struct equivalence_result
{
  bool equivalent = true;
  uint64_t cycles_checked = 0;
  std::string reason;                /*!< set on counterexample */
  stimulus trace;                    /*!< inputs up to and including the mismatching cycle */
  std::vector<uint8_t> expected;     /*!< outputs of `a` at the mismatch */
  std::vector<uint8_t> actual;       /*!< outputs of `b` at the mismatch */
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
};

/*! \brief Exhaustive stimulus: every vector streamed once, then each held for depth + 1 cycles. */
stimulus exhaustive_stimulus( uint32_t width, uint32_t depth );

/*! \brief Cycle-by-cycle output comparison from the reset state.

  Both netlists must have the same data inputs and outputs by name.  A tie
  inside a threshold cell of either design is reported as a counterexample.
*/
equivalence_result check_equivalence( netlist const& a, obfuscation_key const* key_a, netlist const& b, obfuscation_key const* key_b,
                                      equivalence_params const& params );

struct power_proxy
{
  uint64_t cmos_toggles = 0; /*!< toggles on nets driven by gates or flops */
  double tlg_cost = 0.0;     /*!< unit cost times evaluation count */
  double tlg_cost_per_cycle_mean = 0.0;
  double tlg_cost_per_cycle_variance = 0.0;
};

power_proxy compute_power_proxy( netlist const& nl, activity const& act, double tlg_unit_cost = 1.0 );

/*! \brief Value change dump of every net, one clock period per cycle. */
void write_vcd( std::ostream& os, netlist const& nl, obfuscation_key const* key, stimulus const& inputs );

} // namespace tlobf
