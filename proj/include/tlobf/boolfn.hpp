#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tlobf
{

/*! \brief Complete truth table over at most 12 variables.

  Bit `i` holds the function value at the assignment whose binary encoding is
  `i`, with variable 0 in the least significant position.  Variables are
  0-based in the API; textual notations (`[w1,...;T]`, CLI hex) are 1-based.
*/
class truth_table
{
public:
  static constexpr uint32_t max_vars = 12u;

  truth_table() : truth_table( 0u ) {}
  explicit truth_table( uint32_t num_vars );

  uint32_t num_vars() const noexcept { return num_vars_; }
  uint64_t num_bits() const noexcept { return uint64_t( 1 ) << num_vars_; }

  bool get_bit( uint64_t index ) const { return ( words_[index >> 6] >> ( index & 63u ) ) & 1u; }
  void set_bit( uint64_t index, bool value );

  std::vector<uint64_t> const& words() const noexcept { return words_; }

  bool is_const0() const;
  bool is_const1() const;

  bool operator==( truth_table const& ) const = default;
  auto operator<=>( truth_table const& ) const = default;

private:
  uint32_t num_vars_;
  std::vector<uint64_t> words_;
};

truth_table make_const( uint32_t num_vars, bool value );
/*! \brief Projection onto variable `var`. */
truth_table make_var( uint32_t num_vars, uint32_t var );

/*! \brief Parses a hex string (optional `0x`), bit i of the value = f at index i. */
truth_table from_hex( std::string_view hex, uint32_t num_vars );
std::string to_hex( truth_table const& tt );
/*! \brief Same as `to_hex` with a `0x` prefix. */
std::string to_hex_prefixed( truth_table const& tt );

/*! \brief Bit-packs an assignment into its table index. */
uint64_t encode_assignment( std::span<const uint8_t> assignment );
std::vector<uint8_t> decode_assignment( uint64_t index, uint32_t num_vars );

bool evaluate( truth_table const& tt, std::span<const uint8_t> assignment );

/*! \brief Indices of variables the function depends on, ascending. */
std::vector<uint32_t> support( truth_table const& tt );
bool has_var( truth_table const& tt, uint32_t var );

bool is_positive_unate( truth_table const& tt, uint32_t var );
bool is_negative_unate( truth_table const& tt, uint32_t var );

truth_table complement( truth_table const& tt );
/*! \brief Substitutes `!x_var` for `x_var`. */
truth_table flip( truth_table const& tt, uint32_t var );
/*! \brief Renames variable `i` into `perm[i]`. */
truth_table permute( truth_table const& tt, std::span<const uint32_t> perm );

/*! \brief Builds a table by exhaustive evaluation of `fn` on every index. */
template<typename Fn>
truth_table tabulate( uint32_t num_vars, Fn&& fn )
{
  truth_table tt( num_vars );
  for ( uint64_t i = 0; i < tt.num_bits(); ++i )
  {
    tt.set_bit( i, fn( i ) );
  }
  return tt;
}

} // namespace tlobf
