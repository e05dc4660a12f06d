#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include <tlobf/bench.hpp>
#include <tlobf/cuts.hpp>

#include "fixtures.hpp"

using namespace tlobf;

namespace
{

/* all minimal leaf sets of size <= k that separate `root` from the primary inputs and flop outputs */
std::set<std::vector<net_id>> brute_force_cuts( netlist const& nl, net_id root, uint32_t k )
{
  auto const drivers = compute_drivers( nl );
  std::vector<net_id> tfi;
  std::vector<uint8_t> seen( nl.num_nets(), 0u );
  std::vector<net_id> stack{ root };
  while ( !stack.empty() )
  {
    auto const n = stack.back();
    stack.pop_back();
    if ( seen[n] )
      continue;
    seen[n] = 1u;
    tfi.push_back( n );
    if ( drivers[n].what == driver::kind::gate )
      for ( auto f : nl.gates[drivers[n].index].fanins )
        stack.push_back( f );
  }
  std::ranges::sort( tfi );

  auto separates = [&]( std::vector<net_id> const& leaves ) {
    std::vector<uint8_t> visited( nl.num_nets(), 0u );
    std::vector<net_id> todo{ root };
    while ( !todo.empty() )
    {
      auto const n = todo.back();
      todo.pop_back();
      if ( visited[n] || std::ranges::binary_search( leaves, n ) )
        continue;
      visited[n] = 1u;
      if ( drivers[n].what != driver::kind::gate )
        return false;
      for ( auto f : nl.gates[drivers[n].index].fanins )
        todo.push_back( f );
    }
    return true;
  };

  std::set<std::vector<net_id>> result;
  REQUIRE( tfi.size() <= 24 );
  for ( uint64_t mask = 0; mask < ( uint64_t{ 1 } << tfi.size() ); ++mask )
  {
    if ( std::popcount( mask ) > static_cast<int>( k ) )
      continue;
    std::vector<net_id> leaves;
    for ( size_t i = 0; i < tfi.size(); ++i )
      if ( ( mask >> i ) & 1u )
        leaves.push_back( tfi[i] );
    if ( !separates( leaves ) )
      continue;
    bool minimal = true;
    for ( size_t i = 0; i < leaves.size() && minimal; ++i )
    {
      auto smaller = leaves;
      smaller.erase( smaller.begin() + static_cast<std::ptrdiff_t>( i ) );
      minimal = !separates( smaller );
    }
    if ( minimal )
      result.insert( leaves );
  }
  return result;
}

netlist random_cone( uint64_t seed, uint32_t gates )
{
  std::mt19937_64 rng( seed );
  netlist_builder b( "cone" );
  std::vector<net_id> nets;
  for ( int i = 0; i < 5; ++i )
    nets.push_back( b.input( "i" + std::to_string( i ) ) );
  std::vector<gate_type> const types{ gate_type::inv, gate_type::and2, gate_type::or2, gate_type::xor2, gate_type::maj3, gate_type::nand2 };
  for ( uint32_t g = 0; g < gates; ++g )
  {
    auto const type = types[rng() % types.size()];
    std::vector<net_id> fanins( gate_function( type ).num_vars() );
    for ( auto& f : fanins )
      f = nets[nets.size() - 1 - rng() % std::min<size_t>( nets.size(), 6 )];
    nets.push_back( b.gate( type, fanins ) );
  }
  b.output( b.flop( nets.back(), "q" ) );
  return b.build();
}

std::vector<std::string> names( netlist const& nl, std::vector<net_id> const& nets )
{
  std::vector<std::string> out;
  for ( auto n : nets )
    out.push_back( nl.net_name( n ) );
  std::ranges::sort( out );
  return out;
}

} // namespace

TEST_CASE( "full adder carry cone has the three-input cut" )
{
  auto const nl = fixture::full_adder();
  auto const root = *nl.find_net( "cout" );
  auto const cuts = enumerate_cuts( nl, root, 9 );
  auto const it = std::ranges::find_if( cuts, [&]( cut const& c ) { return names( nl, c.leaves ) == std::vector<std::string>{ "a", "b", "cin" }; } );
  REQUIRE( it != cuts.end() );
  CHECK( it->cone.size() == 4 );
  CHECK( it == cuts.begin() );
  /* MAJ over the sorted leaves a, b, cin */
  CHECK( cone_function( nl, *it ) == from_hex( "e8", 3 ) );
  CHECK( cuts.back().leaves == std::vector<net_id>{ root } );
  CHECK( cuts.back().cone.empty() );
}

TEST_CASE( "input root has only the trivial cut" )
{
  auto const nl = fixture::full_adder();
  auto const a = *nl.find_net( "a" );
  auto const cuts = enumerate_cuts( nl, a, 4 );
  REQUIRE( cuts.size() == 1 );
  CHECK( cuts[0].leaves == std::vector<net_id>{ a } );
}

TEST_CASE( "wide AND tree yields only small cuts" )
{
  netlist_builder b( "and10" );
  std::vector<net_id> layer;
  for ( int i = 0; i < 10; ++i )
    layer.push_back( b.input( "x" + std::to_string( i ) ) );
  while ( layer.size() > 1 )
  {
    std::vector<net_id> next;
    for ( size_t i = 0; i + 1 < layer.size(); i += 2 )
      next.push_back( b.gate( gate_type::and2, { layer[i], layer[i + 1] } ) );
    if ( layer.size() % 2 )
      next.push_back( layer.back() );
    layer = next;
  }
  b.output( b.flop( layer[0], "q" ) );
  auto const nl = b.build();
  auto const cuts = enumerate_cuts( nl, layer[0], 9 );
  CHECK_FALSE( cuts.empty() );
  for ( auto const& c : cuts )
  {
    CHECK( c.leaves.size() <= 9 );
    auto const tt = cone_function( nl, c );
    CHECK( tt.num_bits() == ( uint64_t{ 1 } << c.leaves.size() ) );
    CHECK( tt.get_bit( tt.num_bits() - 1 ) );
  }
  CHECK( std::ranges::none_of( cuts, []( cut const& c ) { return c.leaves.size() == 10; } ) );
  std::set<std::vector<net_id>> got;
  for ( auto const& c : cuts )
    got.insert( c.leaves );
  CHECK( got == brute_force_cuts( nl, layer[0], 9 ) );
}

TEST_CASE( "cut enumeration matches brute force on small cones" )
{
  for ( uint64_t seed = 1; seed <= 40; ++seed )
  {
    auto const nl = random_cone( seed, 4 + seed % 9 );
    auto const root = nl.latches[0].d;
    for ( uint32_t k : { 2u, 3u, 4u, 6u } )
    {
      std::set<std::vector<net_id>> got;
      for ( auto const& c : enumerate_cuts( nl, root, k ) )
        got.insert( c.leaves );
      CHECK( got == brute_force_cuts( nl, root, k ) );
    }
  }
}

TEST_CASE( "cuts come largest cone first and cone functions agree with simulation" )
{
  auto const nl = random_cone( 7, 10 );
  auto const root = nl.latches[0].d;
  auto const cuts = enumerate_cuts( nl, root, 5 );
  for ( size_t i = 1; i < cuts.size(); ++i )
    CHECK( cuts[i - 1].cone.size() >= cuts[i].cone.size() );

  auto const full = std::ranges::find_if( cuts, [&]( cut const& c ) {
    return std::ranges::all_of( c.leaves, [&]( net_id n ) { return compute_drivers( nl )[n].what == driver::kind::input; } );
  } );
  REQUIRE( full != cuts.end() );
  auto const tt = cone_function( nl, *full );
  /* every other cut computes the same function once its leaves are expressed over the inputs */
  for ( auto const& c : cuts )
  {
    std::vector<truth_table> leaf_tables;
    for ( auto l : c.leaves )
    {
      cut const sub{ l, full->leaves, cone_gates( nl, l, full->leaves ) };
      leaf_tables.push_back( cone_function( nl, sub ) );
    }
    auto const f = cone_function( nl, c );
    auto const composed = tabulate( tt.num_vars(), [&]( uint64_t m ) {
      uint64_t index = 0;
      for ( size_t j = 0; j < leaf_tables.size(); ++j )
        index |= static_cast<uint64_t>( leaf_tables[j].get_bit( m ) ) << j;
      return f.get_bit( index );
    } );
    CHECK( composed == tt );
  }
}
