#pragma once

#include <cstdint>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <tlobf/boolfn.hpp>
#include <tlobf/threshold.hpp>

namespace tlobf
{

enum class vt_class : uint8_t
{
  low,
  high
};

enum class slot_drive : uint8_t
{
  signal,
  tie0, /*!< gate at logic 0, always conducts */
  tie1  /*!< gate at logic 1, never conducts */
};

/*! \brief One pMOS input transistor of a differential cell.

  A signal slot conducts iff the voltage applied to its gate is 0, that is iff
  the referenced input is 1 for a complemented slot or 0 for a true slot.
*/
struct slot
{
  slot_drive drive = slot_drive::tie1;
  uint32_t input = 0; /*!< index into `differential_spec::inputs` */
  bool complemented = false;
  vt_class vt = vt_class::low;

  static slot signal( uint32_t input, bool complemented, vt_class vt = vt_class::low ) { return { slot_drive::signal, input, complemented, vt }; }
  static slot tie0( vt_class vt = vt_class::low ) { return { slot_drive::tie0, 0, false, vt }; }
  static slot tie1( vt_class vt = vt_class::low ) { return { slot_drive::tie1, 0, false, vt }; }

  bool conducts( std::span<const uint8_t> values ) const
  {
    switch ( drive )
    {
    case slot_drive::tie0:
      return true;
    case slot_drive::tie1:
      return false;
    default:
      return values[input] == ( complemented ? 1u : 0u );
    }
  }

  bool operator==( slot const& ) const = default;
};

/*! \brief Left/right input networks of a differential threshold cell.

  The cell outputs 1 iff more low-Vt slots conduct on the left than on the
  right.  `cell_size` is 0 before library fitting.  `reserved_decoys` counts
  the high-Vt positions per side the cell variant provides; they are filled in
  by `obfuscate_instance`.
*/
struct differential_spec
{
  std::vector<std::string> inputs;
  std::vector<slot> left;
  std::vector<slot> right;
  uint32_t cell_size = 0;
  uint32_t reserved_decoys = 0;

  bool operator==( differential_spec const& ) const = default;
};

/*! \brief Names `a`, `b`, ... for up to 26 inputs, `x1`, `x2`, ... beyond. */
std::vector<std::string> default_input_names( uint32_t num_vars );

/*! \brief Weights doubled, threshold 2T-1, so the weighted sum never equals it. */
threshold_function double_and_oddify( threshold_function const& tf );

/*! \brief All literals on the left, the threshold as tie-0 slots on the right.

  `tf` must come from `double_and_oddify`.  Variables listed in `negated` enter
  as their complement (output of `normalize_positive`).
*/
differential_spec naive_assignment( threshold_function const& tf, std::vector<std::string> inputs, std::span<const uint32_t> negated = {} );

/*! \brief Moves literals from the left network to the right one.

  Each unit move removes one signal slot from the left and turns one right
  tie-0 slot into the same signal with inverted polarity, which keeps
  (left conducting - right conducting) unchanged on every input.  Every tie-0
  slot is converted while the left still has signal slots.  Literals are moved
  in two rounds: first up to half of each literal's copies in order of
  descending count then ascending index, then the remaining copies in the
  reverse order.
*/
differential_spec balance( differential_spec const& spec );

inline constexpr std::array<uint32_t, 4> default_cell_sizes{ 3u, 5u, 7u, 9u };

/*! \brief Pads both sides with tie-1 slots to the smallest library cell. */
differential_spec fit_to_library( differential_spec const& spec, std::span<const uint32_t> cell_sizes, uint32_t decoys );
differential_spec fit_to_library( differential_spec const& spec, uint32_t decoys );

/*! \brief Conducting low-Vt slots on (left, right). */
std::pair<int, int> conducting_counts( differential_spec const& spec, std::span<const uint8_t> values );

/*! \brief Ideal output of the cell; throws `tie_violation` on equal counts. */
bool eval_diff( differential_spec const& spec, std::span<const uint8_t> values );

struct vt_override
{
  std::vector<vt_class> left;
  std::vector<vt_class> right;
};

/*! \brief Exhaustive table over `spec.inputs`, optionally with replaced Vt classes.

  Throws `tie_violation` carrying the first tying input index.
*/
truth_table spec_to_truth_table( differential_spec const& spec, std::optional<vt_override> const& vt = std::nullopt );

/*! \brief Same as `spec_to_truth_table`, but ties are reported as `std::nullopt`. */
std::optional<truth_table> try_spec_to_truth_table( differential_spec const& spec, std::optional<vt_override> const& vt = std::nullopt );

/*! \brief Text form `L: ~a,~a,~b | R: a,1,1`; high-Vt slots get a `*` when `mark_vt` is set. */
std::string to_notation( differential_spec const& spec, bool mark_vt = false );

/*! \brief Complete mapping flow for one threshold function. */
differential_spec map_threshold_function( threshold_function const& tf, std::vector<std::string> inputs, uint32_t decoys = 0u,
                                          std::span<const uint32_t> cell_sizes = default_cell_sizes );

/*! \brief Two-level realization of 3-input parity.

  `first` computes g = MAJ(a,b,c) over inputs (a,b,c); `second` realizes
  [1,1,1,-2;1] over inputs (a,b,c,g).  Both levels evaluate within one clock
  cycle, so the pair behaves as a single sequential element.
*/
struct xor3_macro
{
  differential_spec first;
  differential_spec second;
};

/*! \brief Builds the macro; `internal` names g, `inverted` yields 3-input XNOR. */
xor3_macro make_xor3_macro( std::vector<std::string> inputs = { "a", "b", "c" }, std::string internal = "g", bool inverted = false );

/*! \brief External inputs of the macro: the union of both levels' inputs without g. */
std::vector<std::string> macro_inputs( xor3_macro const& macro );

/*! \brief Composite output; `values` are ordered as `macro_inputs( macro )`. */
bool eval_xor3_macro( xor3_macro const& macro, std::span<const uint8_t> values );
truth_table xor3_macro_truth_table( xor3_macro const& macro );

} // namespace tlobf
