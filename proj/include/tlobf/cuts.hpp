#pragma once

#include <cstdint>
#include <vector>

#include <tlobf/boolfn.hpp>
#include <tlobf/netlist.hpp>

namespace tlobf
{

/*! \brief Leaf set separating `root` from the rest of the circuit. */
struct cut
{
  net_id root = 0;
  std::vector<net_id> leaves; /*!< sorted by net id */
  std::vector<uint32_t> cone; /*!< gate indices between leaves and root, fanins first */

  bool operator==( cut const& ) const = default;
};

/*! \brief All irredundant cuts of `root` with at most `max_leaves` leaves.

  Only primitive gates are traversed; primary inputs, flop outputs and
  threshold cell outputs are always leaves.  A cut is irredundant if no other
  returned cut is a proper subset of it.  Cuts are ordered by decreasing cone
  size, then by leaf count and leaf ids.  `limit` caps the number of cuts kept
  per net (0 keeps all).
*/
std::vector<cut> enumerate_cuts( netlist const& nl, net_id root, uint32_t max_leaves, uint32_t limit = 0u );

/*! \brief Function of the cone over `c.leaves` (leaf 0 is the least significant variable). */
truth_table cone_function( netlist const& nl, cut const& c );

/*! \brief Gates strictly between `leaves` and `root`, fanins first. */
std::vector<uint32_t> cone_gates( netlist const& nl, net_id root, std::vector<net_id> const& leaves );

} // namespace tlobf
