#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <tlobf/boolfn.hpp>

namespace tlobf
{

/*! \brief Integer linear form `[w1,...,wn;T]`, value 1 iff sum(w_i x_i) >= T. */
struct threshold_function
{
  std::vector<int> weights;
  int threshold = 0;

  uint32_t num_vars() const noexcept { return static_cast<uint32_t>( weights.size() ); }

  bool operator==( threshold_function const& ) const = default;
};

std::string to_string( threshold_function const& tf );
/*! \brief Parses the `[w1,...,wn;T]` notation. */
threshold_function parse_threshold_function( std::string_view text );

bool eval_threshold( threshold_function const& tf, std::span<const uint8_t> assignment );
truth_table to_truth_table( threshold_function const& tf );

/*! \brief Default weight bound: 8 for up to 5 variables, 16 above. */
int default_weight_bound( uint32_t num_vars );

/*! \brief Threshold function identification.

  Returns a realization with |w_i| <= `weight_bound` minimizing sum(|w_i|),
  ties broken by the lexicographically smallest weight vector and then the
  smallest threshold.  Returns `std::nullopt` iff no realization exists within
  the bound.  Functions with at most four variables are solved by ordered
  exhaustive enumeration; larger ones by branch and bound over weights sorted
  by Chow parameters.

  Throws `capacity_error` for more than 10 variables.
*/
std::optional<threshold_function> identify( truth_table const& tt, int weight_bound );
std::optional<threshold_function> identify( truth_table const& tt );

namespace detail
{
std::optional<threshold_function> identify_exhaustive( truth_table const& tt, int weight_bound );
std::optional<threshold_function> identify_branch_and_bound( truth_table const& tt, int weight_bound );
} // namespace detail

struct positive_form
{
  threshold_function function;
  /*! \brief 0-based variables that were complemented, ascending. */
  std::vector<uint32_t> complemented;
};

/*! \brief Rewrites negative weights by complementing their variables.

  For each w_i < 0 the variable is complemented, w_i becomes -w_i and the
  threshold grows by |w_i|.  Pointwise the function over the (partially
  complemented) inputs is unchanged.
*/
positive_form normalize_positive( threshold_function const& tf );

/*! \brief Number of threshold functions over `num_vars` <= 4 variables. */
uint64_t count_threshold_functions( uint32_t num_vars );

} // namespace tlobf
