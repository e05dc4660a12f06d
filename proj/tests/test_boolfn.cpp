#include <doctest.h>

#include <tlobf/boolfn.hpp>
#include <tlobf/errors.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

using namespace tlobf;

namespace
{

truth_table and3()
{
  return from_hex( "80", 3 );
}

truth_table random_table( std::mt19937_64& rng, uint32_t n )
{
  return tabulate( n, [&]( uint64_t ) { return rng() & 1u; } );
}

} // namespace

TEST_CASE( "evaluate reads the encoded index" )
{
  std::vector<uint8_t> const all{ 1, 1, 1 };
  std::vector<uint8_t> const two{ 1, 1, 0 };
  CHECK( evaluate( and3(), all ) );
  CHECK_FALSE( evaluate( and3(), two ) );
  CHECK( evaluate( make_const( 0, true ), std::vector<uint8_t>{} ) );
  CHECK_THROWS_AS( evaluate( and3(), std::span<const uint8_t>( two.data(), 2 ) ), contract_error );
}

TEST_CASE( "support" )
{
  CHECK( support( and3() ) == std::vector<uint32_t>{ 0, 1, 2 } );
  CHECK( support( make_var( 2, 0 ) ) == std::vector<uint32_t>{ 0 } );
  CHECK( support( make_const( 3, false ) ).empty() );
}

TEST_CASE( "positive unateness" )
{
  CHECK( is_positive_unate( and3(), 0 ) );
  CHECK_FALSE( is_positive_unate( from_hex( "6", 2 ), 0 ) );
  CHECK( is_positive_unate( make_const( 1, true ), 0 ) );
  CHECK_THROWS_AS( is_positive_unate( and3(), 3 ), contract_error );
}

TEST_CASE( "hex round trip and capacity" )
{
  CHECK( to_hex( and3() ) == "80" );
  CHECK( to_hex( make_var( 1, 0 ) ) == "2" );
  CHECK( to_hex_prefixed( from_hex( "0xE8", 3 ) ) == "0xe8" );
  CHECK_THROWS_AS( from_hex( "100", 3 ), contract_error );
  CHECK_THROWS_AS( from_hex( "zz", 3 ), contract_error );
  CHECK_THROWS_AS( truth_table( 13 ), capacity_error );
  auto const big = make_var( 12, 11 );
  CHECK( from_hex( to_hex( big ), 12 ) == big );
}

TEST_CASE( "properties on random tables" )
{
  std::mt19937_64 rng( 7 );
  for ( auto trial = 0; trial < 200; ++trial )
  {
    auto const n = static_cast<uint32_t>( rng() % 9 );
    auto tt = random_table( rng, n );
    /* sparsify so that vacuous variables occur */
    for ( auto v = 0u; v < n; ++v )
    {
      if ( rng() % 3 == 0 )
      {
        tt = tabulate( n, [&]( uint64_t i ) { return tt.get_bit( i & ~( uint64_t( 1 ) << v ) ); } );
      }
    }

    /* rebuilding from evaluate reproduces the bits */
    auto const rebuilt = tabulate( n, [&]( uint64_t i ) {
      auto const a = decode_assignment( i, n );
      return evaluate( tt, a );
    } );
    CHECK( rebuilt == tt );

    /* support commutes with permutation */
    std::vector<uint32_t> perm( n );
    std::iota( perm.begin(), perm.end(), 0u );
    std::shuffle( perm.begin(), perm.end(), rng );
    auto const permuted = permute( tt, perm );
    std::vector<uint32_t> expected;
    for ( auto v : support( tt ) )
      expected.push_back( perm[v] );
    std::sort( expected.begin(), expected.end() );
    CHECK( support( permuted ) == expected );

    /* positive unate in both a variable and its complement only if vacuous */
    for ( auto v = 0u; v < n; ++v )
    {
      if ( is_positive_unate( tt, v ) && is_positive_unate( flip( tt, v ), v ) )
        CHECK_FALSE( has_var( tt, v ) );
    }
  }
}
