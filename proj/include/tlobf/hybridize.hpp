#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <tlobf/netlist.hpp>
#include <tlobf/obfuscate.hpp>

namespace tlobf
{

struct hybridize_params
{
  uint32_t max_inputs = 9;
  uint32_t decoys = 2;      /*!< requested k, clamped to what the library offers */
  bool xor_macro = false;   /*!< also absorb 3-input parity cones as two-cell macros */
  uint64_t seed = 1u;
  uint32_t cut_limit = 64u; /*!< cuts kept per net during enumeration */
  std::string key_ref;      /*!< key file name recorded in the netlist */
  std::vector<uint32_t> cell_sizes{ 3u, 5u, 7u, 9u };
};

struct replacement
{
  std::string flop;     /*!< output net of the replaced flop */
  std::string instance; /*!< name of the (second-level) cell */
  std::vector<std::string> leaves;
  std::string function; /*!< `[w;T]`, `XOR3` or `XNOR3` */
  cell_variant variant;
  uint32_t absorbed = 0; /*!< combinational cells removed with the flop */
};

struct hybrid_report
{
  uint32_t flops_before = 0;
  uint32_t flops_after = 0;
  uint32_t combinational_before = 0;
  uint32_t combinational_after = 0;
  uint32_t absorbed = 0;
  uint32_t macros = 0;
  std::map<std::string, uint32_t> tlgs_by_variant;
  std::vector<replacement> replacements;
};

struct hybrid_result
{
  netlist nl;
  obfuscation_key key;
  hybrid_report report;
};

/*! \brief Replaces flops and their threshold fan-in cones with obfuscated cells.

  Flops are visited in name order.  For each, the cut absorbing the most
  combinational cells is chosen among those whose cone is a threshold
  function fitting the library (or 3-input parity when `xor_macro` is set);
  ties go to the smaller variant, then fewer leaves, then leaf names.  Decoy
  nets are drawn from the transitive fan-in of the cell's leaves and the
  primary inputs with one RNG seeded by `seed`.  The result with its key is
  sequentially equivalent to the input.
*/
hybrid_result hybridize( netlist const& nl, hybridize_params const& params );

} // namespace tlobf
