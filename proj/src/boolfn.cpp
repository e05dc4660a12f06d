#include <tlobf/boolfn.hpp>
#include <tlobf/errors.hpp>

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

namespace tlobf
{

truth_table::truth_table( uint32_t num_vars )
    : num_vars_( num_vars )
{
  if ( num_vars > max_vars )
  {
    throw capacity_error( fmt::format( "truth table supports at most {} variables, got {}", max_vars, num_vars ) );
  }
  words_.assign( num_vars <= 6u ? 1u : ( 1u << ( num_vars - 6u ) ), 0u );
}

void truth_table::set_bit( uint64_t index, bool value )
{
  auto const mask = uint64_t( 1 ) << ( index & 63u );
  if ( value )
    words_[index >> 6] |= mask;
  else
    words_[index >> 6] &= ~mask;
}

bool truth_table::is_const0() const
{
  return std::all_of( words_.begin(), words_.end(), []( auto w ) { return w == 0u; } );
}

bool truth_table::is_const1() const
{
  return complement( *this ).is_const0();
}

truth_table make_const( uint32_t num_vars, bool value )
{
  return tabulate( num_vars, [value]( uint64_t ) { return value; } );
}

truth_table make_var( uint32_t num_vars, uint32_t var )
{
  if ( var >= num_vars )
    throw contract_error( fmt::format( "variable {} out of range for {} variables", var + 1, num_vars ) );
  return tabulate( num_vars, [var]( uint64_t i ) { return ( i >> var ) & 1u; } );
}

truth_table from_hex( std::string_view hex, uint32_t num_vars )
{
  if ( hex.starts_with( "0x" ) || hex.starts_with( "0X" ) )
    hex.remove_prefix( 2 );
  if ( hex.empty() )
    throw contract_error( "empty hex truth table" );

  truth_table tt( num_vars );
  uint64_t bit = 0;
  for ( auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4 )
  {
    auto const c = static_cast<char>( std::tolower( static_cast<unsigned char>( *it ) ) );
    int nibble;
    if ( c >= '0' && c <= '9' )
      nibble = c - '0';
    else if ( c >= 'a' && c <= 'f' )
      nibble = c - 'a' + 10;
    else
      throw contract_error( fmt::format( "invalid hex digit '{}'", *it ) );

    for ( auto j = 0u; j < 4u; ++j )
    {
      if ( ( ( nibble >> j ) & 1 ) == 0 )
        continue;
      if ( bit + j >= tt.num_bits() )
        throw contract_error( fmt::format( "hex value has bits beyond 2^{} entries", num_vars ) );
      tt.set_bit( bit + j, true );
    }
  }
  return tt;
}

std::string to_hex( truth_table const& tt )
{
  auto const digits = std::max<uint64_t>( 1u, tt.num_bits() / 4u );
  std::string out;
  out.reserve( digits );
  for ( auto d = digits; d-- > 0; )
  {
    unsigned nibble = 0;
    for ( auto j = 0u; j < 4u; ++j )
    {
      auto const idx = d * 4u + j;
      if ( idx < tt.num_bits() && tt.get_bit( idx ) )
        nibble |= 1u << j;
    }
    out.push_back( "0123456789abcdef"[nibble] );
  }
  return out;
}

std::string to_hex_prefixed( truth_table const& tt )
{
  return "0x" + to_hex( tt );
}

uint64_t encode_assignment( std::span<const uint8_t> assignment )
{
  uint64_t index = 0;
  for ( auto i = 0u; i < assignment.size(); ++i )
  {
    if ( assignment[i] )
      index |= uint64_t( 1 ) << i;
  }
  return index;
}

std::vector<uint8_t> decode_assignment( uint64_t index, uint32_t num_vars )
{
  std::vector<uint8_t> bits( num_vars );
  for ( auto i = 0u; i < num_vars; ++i )
    bits[i] = ( index >> i ) & 1u;
  return bits;
}

bool evaluate( truth_table const& tt, std::span<const uint8_t> assignment )
{
  if ( assignment.size() != tt.num_vars() )
  {
    throw contract_error( fmt::format( "assignment has {} values, table has {} variables", assignment.size(), tt.num_vars() ) );
  }
  return tt.get_bit( encode_assignment( assignment ) );
}

namespace
{

void check_var( truth_table const& tt, uint32_t var )
{
  if ( var >= tt.num_vars() )
    throw contract_error( fmt::format( "variable {} out of range for {} variables", var + 1, tt.num_vars() ) );
}

/* calls fn(index_with_var_0, index_with_var_1) for each cofactor pair */
template<typename Fn>
bool all_pairs( truth_table const& tt, uint32_t var, Fn&& fn )
{
  auto const step = uint64_t( 1 ) << var;
  for ( uint64_t i = 0; i < tt.num_bits(); ++i )
  {
    if ( i & step )
      continue;
    if ( !fn( tt.get_bit( i ), tt.get_bit( i | step ) ) )
      return false;
  }
  return true;
}

} // namespace

bool has_var( truth_table const& tt, uint32_t var )
{
  check_var( tt, var );
  return !all_pairs( tt, var, []( bool lo, bool hi ) { return lo == hi; } );
}

std::vector<uint32_t> support( truth_table const& tt )
{
  std::vector<uint32_t> vars;
  for ( auto v = 0u; v < tt.num_vars(); ++v )
  {
    if ( has_var( tt, v ) )
      vars.push_back( v );
  }
  return vars;
}

bool is_positive_unate( truth_table const& tt, uint32_t var )
{
  check_var( tt, var );
  return all_pairs( tt, var, []( bool lo, bool hi ) { return lo <= hi; } );
}

bool is_negative_unate( truth_table const& tt, uint32_t var )
{
  check_var( tt, var );
  return all_pairs( tt, var, []( bool lo, bool hi ) { return lo >= hi; } );
}

truth_table complement( truth_table const& tt )
{
  return tabulate( tt.num_vars(), [&]( uint64_t i ) { return !tt.get_bit( i ); } );
}

truth_table flip( truth_table const& tt, uint32_t var )
{
  check_var( tt, var );
  return tabulate( tt.num_vars(), [&]( uint64_t i ) { return tt.get_bit( i ^ ( uint64_t( 1 ) << var ) ); } );
}

truth_table permute( truth_table const& tt, std::span<const uint32_t> perm )
{
  if ( perm.size() != tt.num_vars() )
    throw contract_error( "permutation size does not match variable count" );

  std::vector<uint8_t> seen( perm.size(), 0 );
  for ( auto p : perm )
  {
    if ( p >= perm.size() || seen[p]++ )
      throw contract_error( "not a permutation" );
  }

  truth_table out( tt.num_vars() );
  for ( uint64_t i = 0; i < tt.num_bits(); ++i )
  {
    uint64_t j = 0;
    for ( auto v = 0u; v < perm.size(); ++v )
    {
      if ( ( i >> v ) & 1u )
        j |= uint64_t( 1 ) << perm[v];
    }
    out.set_bit( j, tt.get_bit( i ) );
  }
  return out;
}

} // namespace tlobf
