#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <tlobf/boolfn.hpp>
#include <tlobf/tlg_map.hpp>

namespace tlobf
{

/*! \brief Cell variant: `n` valid slots and `k` decoy slots per side. */
struct cell_variant
{
  uint32_t n = 3;
  uint32_t k = 0;

  bool operator==( cell_variant const& ) const = default;
  auto operator<=>( cell_variant const& ) const = default;
};

/*! \brief The seven obfuscated cells: TLG-3/5/7 with one or two decoys, TLG-9 with one. */
std::span<const cell_variant> cell_library();
bool in_library( cell_variant const& variant );
/*! \brief Largest decoy count the library offers for an `n`-slot cell, if any. */
std::optional<uint32_t> max_library_decoys( uint32_t n );

/*! \brief One slot as recorded in a key file. Ties use the signal names "0" and "1". */
struct key_slot
{
  std::string signal;
  bool complemented = false;
  vt_class vt = vt_class::low;

  bool operator==( key_slot const& ) const = default;
};

/*! \brief Secret Vt assignment of one cell instance. */
struct instance_key
{
  std::vector<key_slot> left;
  std::vector<key_slot> right;

  bool operator==( instance_key const& ) const = default;
};

struct obfuscation_key
{
  uint64_t seed = 0;
  std::map<std::string, instance_key> instances;

  bool operator==( obfuscation_key const& ) const = default;
};

instance_key make_instance_key( differential_spec const& spec );

/*! \brief Copies the key's Vt classes into `spec`; slot signals must match. */
differential_spec apply_key( differential_spec const& spec, instance_key const& key );

/*! \brief What layout inspection reveals: every slot reported as low Vt. */
differential_spec visible_structure( differential_spec const& spec );

/*! \brief Adds `variant.k` high-Vt decoy slots per side.

  The spec is padded with tie-1 slots to `variant.n` per side, then each
  decoy slot gets a net drawn uniformly from `pool` and a uniform polarity.
  The slot order of each side is shuffled so positions do not reveal decoys.
  Decoy nets that are not yet inputs of the cell are appended to `inputs`.
*/
std::pair<differential_spec, instance_key> obfuscate_instance( differential_spec const& spec, cell_variant const& variant,
                                                               std::span<const std::string> pool, std::mt19937_64& rng );
std::pair<differential_spec, instance_key> obfuscate_instance( differential_spec const& spec, cell_variant const& variant,
                                                               std::span<const std::string> pool, uint64_t seed );

/*! \brief Number of Vt assignments for a cell: C(n+k, k)^2. */
uint64_t obfuscation_space( uint32_t n, uint32_t k );

/*! \brief C(total, k)^2, the reading where `total` already includes the decoys. */
uint64_t obfuscation_space_total_slots( uint32_t total, uint32_t k );

/*! \brief Truth tables an attacker must consider for a cell.

  Every way of choosing `variant.k` slots per side as high Vt is a hypothesis.
  Hypotheses that tie on some input are dropped when `prune_ties` is set,
  otherwise a tie evaluates to 0.  Tables are over `spec.inputs`.
*/
std::set<truth_table> attacker_candidates( differential_spec const& spec, cell_variant const& variant, bool prune_ties );

/*! \brief Key with one low/high pair of a side exchanged so that the cell's function changes.

  Returns the first such swap (left side first, then by slot index) or
  `std::nullopt` if every swap leaves the function intact.  A swap that makes
  the cell tie also counts as a change.
*/
std::optional<instance_key> corrupt_key( differential_spec const& visible, instance_key const& key );

struct ambiguity_report
{
  std::vector<std::pair<std::string, uint64_t>> candidates; /*!< per instance */
  boost::multiprecision::cpp_int product;
  uint32_t ambiguous_instances = 0; /*!< instances with at least two candidates */

  /*! \brief True iff product >= 2^ambiguous_instances. */
  bool meets_power_bound() const;
  double log2_product() const;
};

ambiguity_report summarize_ambiguity( std::vector<std::pair<std::string, uint64_t>> candidates );

} // namespace tlobf
