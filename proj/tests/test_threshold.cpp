#include <doctest.h>

#include "oracles.hpp"

#include <tlobf/errors.hpp>
#include <tlobf/threshold.hpp>

#include <bit>
#include <random>
#include <tuple>

using namespace tlobf;

namespace
{

bool realizes( threshold_function const& tf, truth_table const& tt )
{
  return to_truth_table( tf ) == tt;
}

/* brute force: minimal sum(|w|), lexicographically smallest weights, smallest T */
std::optional<threshold_function> minimal_by_enumeration( truth_table const& tt, int bound )
{
  auto const n = tt.num_vars();
  std::optional<threshold_function> best;
  auto cost = []( threshold_function const& f ) {
    int c = 0;
    for ( auto w : f.weights )
      c += std::abs( w );
    return c;
  };
  std::vector<int> w( n, -bound );
  int const tmax = static_cast<int>( n ) * bound + 1;
  while ( true )
  {
    for ( int t = -tmax; t <= tmax; ++t )
    {
      threshold_function f{ w, t };
      if ( !realizes( f, tt ) )
        continue;
      if ( !best || std::make_tuple( cost( f ), f.weights, f.threshold ) < std::make_tuple( cost( *best ), best->weights, best->threshold ) )
        best = f;
    }
    uint32_t i = 0;
    while ( i < n && w[i] == bound )
      w[i++] = -bound;
    if ( i == n )
      break;
    ++w[i];
  }
  return best;
}

} // namespace

TEST_CASE( "evaluation of linear forms" )
{
  auto const f = parse_threshold_function( "[2,1,1;2]" );
  CHECK( eval_threshold( f, std::vector<uint8_t>{ 1, 0, 0 } ) );
  CHECK_FALSE( eval_threshold( f, std::vector<uint8_t>{ 0, 1, 0 } ) );
  auto const zero = parse_threshold_function( "[0,0,0;1]" );
  for ( uint64_t i = 0; i < 8; ++i )
    CHECK_FALSE( eval_threshold( zero, decode_assignment( i, 3 ) ) );
  CHECK_THROWS_AS( eval_threshold( f, std::vector<uint8_t>{ 1 } ), contract_error );
  CHECK( to_string( f ) == "[2,1,1;2]" );
  CHECK( to_string( parse_threshold_function( "[1,1,1,-2;1]" ) ) == "[1,1,1,-2;1]" );
  CHECK( parse_threshold_function( "[;1]" ).weights.empty() );
  CHECK_THROWS_AS( parse_threshold_function( "[1,1;x]" ), contract_error );
}

TEST_CASE( "identify reproduces known realizations" )
{
  CHECK( to_string( *identify( from_hex( "80", 3 ) ) ) == "[1,1,1;3]" );
  /* a | bc with a = variable 1 */
  auto const a_or_bc = tabulate( 3, []( uint64_t i ) { return ( i & 1u ) || ( ( i & 6u ) == 6u ); } );
  CHECK( to_string( *identify( a_or_bc ) ) == "[2,1,1;2]" );
  CHECK_FALSE( identify( from_hex( "6", 2 ), 4 ) );
  CHECK( to_string( *identify( from_hex( "e8", 3 ) ) ) == "[1,1,1;2]" );
  CHECK_FALSE( identify( from_hex( "96", 3 ) ) );
  CHECK( to_string( *identify( from_hex( "1", 1 ) ) ) == "[-1;0]" );
  CHECK_THROWS_AS( identify( truth_table( 11 ) ), capacity_error );
  CHECK_THROWS_AS( identify( from_hex( "8", 2 ), 0 ), contract_error );
}

TEST_CASE( "minimality matches brute force for MAJ3 at bound 2" )
{
  auto const maj = from_hex( "e8", 3 );
  auto const brute = minimal_by_enumeration( maj, 2 );
  REQUIRE( brute );
  CHECK( to_string( *brute ) == "[1,1,1;2]" );
  CHECK( *identify( maj, 2 ) == *brute );
}

TEST_CASE( "identify agrees with brute force on all functions of up to three variables" )
{
  for ( uint32_t n = 0; n <= 3; ++n )
  {
    auto const bound = n == 3 ? 3 : 4;
    for ( uint64_t bits = 0; bits < ( uint64_t( 1 ) << ( 1u << n ) ); ++bits )
    {
      auto const tt = oracle::table_from_bits( n, bits );
      auto const brute = minimal_by_enumeration( tt, bound );
      auto const mine = identify( tt, bound );
      REQUIRE( brute.has_value() == mine.has_value() );
      if ( !mine )
        continue;
      /* the constant-one function is canonicalized to threshold 0 */
      if ( tt.is_const1() )
      {
        CHECK( mine->threshold == 0 );
        continue;
      }
      CHECK_MESSAGE( *mine == *brute, to_hex( tt ) );
    }
  }
}

TEST_CASE( "threshold function counts" )
{
  CHECK( count_threshold_functions( 0 ) == 2 );
  CHECK( count_threshold_functions( 2 ) == 14 );
  CHECK( count_threshold_functions( 3 ) == 104 );
  CHECK( count_threshold_functions( 4 ) == oracle::threshold_tables( 4, 8 ).size() );
  CHECK( oracle::threshold_tables( 4, 8 ).size() == 1882 );
  CHECK_THROWS_AS( count_threshold_functions( 5 ), capacity_error );
}

TEST_CASE( "closure under input and output complementation" )
{
  auto const tables = oracle::threshold_tables( 3, 8 );
  for ( auto bits : tables )
  {
    auto const tt = oracle::table_from_bits( 3, bits );
    for ( auto v = 0u; v < 3; ++v )
      CHECK( identify( flip( tt, v ) ) );
    CHECK( identify( complement( tt ) ) );
  }
}

TEST_CASE( "exhaustive and branch-and-bound paths agree" )
{
  std::mt19937_64 rng( 11 );
  /* threshold functions from random forms plus random unate noise */
  for ( auto trial = 0; trial < 300; ++trial )
  {
    auto const n = 3u + static_cast<uint32_t>( rng() % 3 );
    threshold_function f;
    for ( auto i = 0u; i < n; ++i )
      f.weights.push_back( static_cast<int>( rng() % 9 ) - 4 );
    f.threshold = static_cast<int>( rng() % 11 ) - 5;
    auto const tt = to_truth_table( f );
    auto const a = detail::identify_exhaustive( tt, 8 );
    auto const b = detail::identify_branch_and_bound( tt, 8 );
    REQUIRE( a );
    REQUIRE( b );
    CHECK_MESSAGE( *a == *b, to_hex( tt ) );
  }
  for ( auto trial = 0; trial < 300; ++trial )
  {
    auto const tt = tabulate( 4, [&]( uint64_t ) { return rng() & 1u; } );
    CHECK( detail::identify_exhaustive( tt, 8 ).has_value() == detail::identify_branch_and_bound( tt, 8 ).has_value() );
  }
}

TEST_CASE( "soundness on larger functions" )
{
  std::mt19937_64 rng( 5 );
  for ( auto trial = 0; trial < 60; ++trial )
  {
    auto const n = 6u + static_cast<uint32_t>( rng() % 5 );
    threshold_function f;
    for ( auto i = 0u; i < n; ++i )
      f.weights.push_back( static_cast<int>( rng() % 11 ) - 5 );
    f.threshold = static_cast<int>( rng() % 9 ) - 4;
    auto const tt = to_truth_table( f );
    auto const found = identify( tt );
    REQUIRE( found );
    CHECK( to_truth_table( *found ) == tt );
    int sum_found = 0, sum_given = 0;
    for ( auto i = 0u; i < n; ++i )
    {
      sum_found += std::abs( found->weights[i] );
      sum_given += std::abs( f.weights[i] );
    }
    CHECK( sum_found <= sum_given );
  }
  /* parity is never threshold */
  auto const parity = tabulate( 9, []( uint64_t i ) { return std::popcount( i ) & 1; } );
  CHECK_FALSE( identify( parity ) );
  /* x1x2 | x3x4 is 2-asummable, rejected */
  auto const two_pairs = tabulate( 6, []( uint64_t i ) { return ( i & 3u ) == 3u || ( i & 12u ) == 12u; } );
  CHECK_FALSE( identify( two_pairs ) );
}

TEST_CASE( "normalize_positive" )
{
  auto const xor3_second = parse_threshold_function( "[1,1,1,-2;1]" );
  auto const n1 = normalize_positive( xor3_second );
  CHECK( to_string( n1.function ) == "[1,1,1,2;3]" );
  CHECK( n1.complemented == std::vector<uint32_t>{ 3 } );

  auto const n2 = normalize_positive( parse_threshold_function( "[1,1;2]" ) );
  CHECK( to_string( n2.function ) == "[1,1;2]" );
  CHECK( n2.complemented.empty() );

  auto const n3 = normalize_positive( parse_threshold_function( "[-1;0]" ) );
  CHECK( to_string( n3.function ) == "[1;1]" );
  CHECK( n3.complemented == std::vector<uint32_t>{ 0 } );

  /* pointwise preservation */
  std::mt19937_64 rng( 3 );
  for ( auto trial = 0; trial < 200; ++trial )
  {
    threshold_function f;
    auto const n = 1u + static_cast<uint32_t>( rng() % 5 );
    for ( auto i = 0u; i < n; ++i )
      f.weights.push_back( static_cast<int>( rng() % 9 ) - 4 );
    f.threshold = static_cast<int>( rng() % 9 ) - 4;
    auto const pf = normalize_positive( f );
    auto tt = to_truth_table( pf.function );
    for ( auto v : pf.complemented )
      tt = flip( tt, v );
    CHECK( tt == to_truth_table( f ) );
    for ( auto w : pf.function.weights )
      CHECK( w >= 0 );
  }
}
