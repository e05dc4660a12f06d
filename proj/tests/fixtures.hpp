#pragma once

#include <string>

#include <tlobf/bench.hpp>
#include <tlobf/netlist.hpp>
#include <tlobf/obfuscate.hpp>
#include <tlobf/threshold.hpp>

namespace fixture
{

/* full adder with registered sum `s` and carry `co` */
inline tlobf::netlist full_adder()
{
  using tlobf::gate_type;
  tlobf::netlist_builder b( "fa" );
  auto const a = b.input( "a" );
  auto const x = b.input( "b" );
  auto const cin = b.input( "cin" );
  auto const s1 = b.gate( gate_type::xor2, { a, x }, "s1" );
  auto const sum = b.gate( gate_type::xor2, { s1, cin }, "sum" );
  auto const c1 = b.gate( gate_type::and2, { a, x }, "c1" );
  auto const c2 = b.gate( gate_type::and2, { s1, cin }, "c2" );
  auto const cout = b.gate( gate_type::or2, { c1, c2 }, "cout" );
  b.output( b.flop( sum, "s" ) );
  b.output( b.flop( cout, "co" ) );
  return b.build();
}

/* one threshold cell computing `tf` over fresh inputs, optionally obfuscated with decoys on extra inputs */
inline std::pair<tlobf::netlist, tlobf::obfuscation_key> single_cell( std::string const& tf, uint32_t k = 0, uint64_t seed = 1 )
{
  auto const f = tlobf::parse_threshold_function( tf );
  auto const names = tlobf::default_input_names( static_cast<uint32_t>( f.weights.size() ) );
  auto const spec = tlobf::map_threshold_function( f, names );
  tlobf::netlist nl( "cell" );
  for ( auto const& n : names )
  {
    nl.inputs.push_back( nl.add_net( n ) );
  }
  std::vector<std::string> pool;
  for ( uint32_t i = 0; i < k; ++i )
  {
    pool.push_back( "d" + std::to_string( i ) );
    nl.inputs.push_back( nl.add_net( pool.back() ) );
  }
  tlobf::cell_variant const variant{ spec.cell_size, k };
  auto [obf, key] = tlobf::obfuscate_instance( spec, variant, pool, seed );
  tlobf::tlg_instance t{ "u1", nl.add_net( "q" ), variant, tlobf::tlg_stage::sequential, "", tlobf::visible_structure( obf ) };
  nl.tlgs.push_back( t );
  nl.outputs.push_back( t.output );
  tlobf::obfuscation_key ok{ seed, {} };
  if ( k > 0 )
  {
    ok.instances.emplace( "u1", key );
  }
  return { nl, ok };
}

} // namespace fixture
