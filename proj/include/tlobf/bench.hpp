#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <tlobf/netlist.hpp>

namespace tlobf
{

/*! \brief Helper for building netlists gate by gate with generated net names. */
class netlist_builder
{
public:
  explicit netlist_builder( std::string model, std::string clock = "clk" );

  net_id input( std::string const& name );
  void output( net_id n );
  net_id gate( gate_type type, std::initializer_list<net_id> fanins, std::string const& name = {} );
  net_id gate( gate_type type, std::vector<net_id> const& fanins, std::string const& name = {} );
  /*! \brief Rising-edge flop on the builder's clock. */
  net_id flop( net_id d, std::string const& name = {} );
  net_id constant( bool value );

  netlist& get() noexcept { return nl_; }
  /*! \brief Validates and returns the netlist. */
  netlist build();

private:
  std::string fresh( std::string const& prefix );

  netlist nl_;
  std::string clock_;
  uint32_t counter_ = 0;
  std::optional<net_id> const0_, const1_;
};

/*! \brief Carry-save helpers on bit vectors (LSB first). */
struct adder_bits
{
  net_id sum;
  net_id carry;
};
adder_bits full_adder( netlist_builder& b, net_id x, net_id y, net_id z );
adder_bits half_adder( netlist_builder& b, net_id x, net_id y );

enum class bench_kind
{
  wallace,
  fir
};

struct bench_params
{
  bench_kind kind = bench_kind::wallace;
  uint32_t width = 8;
  uint32_t taps = 4;
  uint32_t stages = 2;
  std::vector<int> coefficients; /*!< FIR only; defaults derived from `taps` when empty */
  bool verify = true;            /*!< check against arithmetic before returning */
};

/*! \brief Default FIR coefficients, starting 3, -5, 7, 2. */
std::vector<int> default_fir_coefficients( uint32_t taps );

/*! \brief Signed Baugh-Wooley multiplier with Wallace reduction.

  Inputs `a0..`, `b0..`, output `p0..p{2w-1}`, latency `stages` cycles.  With
  two stages the reduced carry-save rows are registered before the final
  ripple adder.
*/
netlist generate_wallace( uint32_t width, uint32_t stages );

/*! \brief Transposed-form FIR with constant coefficients.

  Input `x0..`, output `y0..`.  With two stages the input is registered too,
  so y(t) = sum_k c_k x(t - stages - k).
*/
netlist generate_fir( uint32_t width, std::vector<int> const& coefficients, uint32_t stages );

/*! \brief Output width of the FIR generator. */
uint32_t fir_output_width( uint32_t width, std::vector<int> const& coefficients );

netlist generate_bench( bench_params const& params );

/*! \brief Checks a generated design against its arithmetic reference.

  Exhaustive when the operand space is at most 2^16, otherwise `vectors`
  random inputs.  Returns the first failing cycle or -1.
*/
int64_t verify_bench( netlist const& nl, bench_params const& params, uint64_t vectors = 100000u, uint64_t seed = 1u );

} // namespace tlobf
