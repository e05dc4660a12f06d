#include <tlobf/hybridize.hpp>

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include <tlobf/cuts.hpp>
#include <tlobf/errors.hpp>
#include <tlobf/threshold.hpp>

namespace tlobf
{

namespace
{

struct consumer
{
  enum class kind : uint8_t
  {
    gate,
    latch,
    tlg,
    output
  } what;
  uint32_t index;
};

std::vector<std::vector<consumer>> compute_consumers( netlist const& nl )
{
  std::vector<std::vector<consumer>> result( nl.num_nets() );
  for ( uint32_t i = 0; i < nl.gates.size(); ++i )
  {
    for ( auto f : nl.gates[i].fanins )
    {
      result[f].push_back( { consumer::kind::gate, i } );
    }
  }
  for ( uint32_t i = 0; i < nl.latches.size(); ++i )
  {
    result[nl.latches[i].d].push_back( { consumer::kind::latch, i } );
  }
  for ( uint32_t i = 0; i < nl.tlgs.size(); ++i )
  {
    for ( auto const& name : nl.tlgs[i].spec.inputs )
    {
      result[*nl.find_net( name )].push_back( { consumer::kind::tlg, i } );
    }
  }
  for ( uint32_t i = 0; i < nl.outputs.size(); ++i )
  {
    result[nl.outputs[i]].push_back( { consumer::kind::output, i } );
  }
  return result;
}

struct candidate
{
  uint32_t latch = 0;
  std::vector<net_id> leaves; /* support leaves, cut order */
  std::vector<uint32_t> cone;
  uint32_t absorbed = 0;
  std::optional<threshold_function> tf; /* empty for the parity macro */
  bool inverted = false;
  cell_variant variant;

  auto rank( netlist const& nl ) const
  {
    std::vector<std::string> names;
    for ( auto l : leaves )
    {
      names.push_back( nl.net_name( l ) );
    }
    return std::make_tuple( -static_cast<int64_t>( absorbed ), variant.n, variant.k, !tf.has_value(), leaves.size(), names );
  }
};

uint32_t clamp_decoys( uint32_t n, uint32_t requested )
{
  if ( requested == 0 )
  {
    return 0;
  }
  auto const limit = max_library_decoys( n );
  return limit ? std::min( requested, *limit ) : 0u;
}

/* cone gates that disappear once latch `flop` is replaced */
uint32_t count_absorbed( netlist const& nl, std::vector<std::vector<consumer>> const& consumers, std::vector<uint32_t> const& cone,
                         uint32_t flop )
{
  std::set<uint32_t> removable;
  for ( auto it = cone.rbegin(); it != cone.rend(); ++it )
  {
    bool ok = true;
    for ( auto const& c : consumers[nl.gates[*it].output] )
    {
      if ( !( ( c.what == consumer::kind::latch && c.index == flop ) || ( c.what == consumer::kind::gate && removable.contains( c.index ) ) ) )
      {
        ok = false;
        break;
      }
    }
    if ( ok )
    {
      removable.insert( *it );
    }
  }
  return static_cast<uint32_t>( removable.size() );
}

std::optional<candidate> best_candidate( netlist const& nl, std::vector<std::vector<consumer>> const& consumers, uint32_t flop,
                                         hybridize_params const& params )
{
  auto const drivers = compute_drivers( nl );
  auto const root = nl.latches[flop].d;
  if ( drivers[root].what != driver::kind::gate )
  {
    return std::nullopt;
  }
  std::optional<candidate> best;
  for ( auto const& c : enumerate_cuts( nl, root, params.max_inputs, params.cut_limit ) )
  {
    if ( c.cone.empty() )
    {
      continue;
    }
    auto const absorbed = count_absorbed( nl, consumers, c.cone, flop );
    if ( absorbed == 0 || ( best && absorbed < best->absorbed ) )
    {
      continue;
    }
    auto const tt = cone_function( nl, c );
    auto const vars = support( tt );
    if ( vars.empty() )
    {
      continue;
    }
    candidate cand;
    cand.latch = flop;
    cand.cone = c.cone;
    cand.absorbed = absorbed;
    for ( auto v : vars )
    {
      cand.leaves.push_back( c.leaves[v] );
    }
    auto const reduced = tabulate( static_cast<uint32_t>( vars.size() ), [&]( uint64_t m ) {
      uint64_t index = 0;
      for ( size_t i = 0; i < vars.size(); ++i )
      {
        index |= ( ( m >> i ) & 1u ) << vars[i];
      }
      return tt.get_bit( index );
    } );

    if ( auto const tf = identify( reduced ) )
    {
      std::vector<std::string> names;
      for ( auto l : cand.leaves )
      {
        names.push_back( nl.net_name( l ) );
      }
      try
      {
        auto const spec = map_threshold_function( *tf, names, 0u, params.cell_sizes );
        cand.tf = tf;
        cand.variant = { spec.cell_size, clamp_decoys( spec.cell_size, params.decoys ) };
      }
      catch ( capacity_error const& )
      {
        continue;
      }
    }
    else if ( params.xor_macro && vars.size() == 3u )
    {
      auto const parity = tabulate( 3u, []( uint64_t m ) { return std::popcount( m ) % 2 == 1; } );
      if ( reduced != parity && reduced != complement( parity ) )
      {
        continue;
      }
      cand.inverted = reduced != parity;
      cand.variant = { 5u, clamp_decoys( 5u, params.decoys ) };
    }
    else
    {
      continue;
    }
    if ( !best || cand.rank( nl ) < best->rank( nl ) )
    {
      best = std::move( cand );
    }
  }
  return best;
}

std::string fresh_name( netlist const& nl, std::set<std::string>& taken, std::string const& base )
{
  auto name = base;
  for ( uint32_t i = 1; nl.find_net( name ) || taken.contains( name ); ++i )
  {
    name = fmt::format( "{}_{}", base, i );
  }
  taken.insert( name );
  return name;
}

/* nets feeding `roots` combinationally, including the roots */
std::vector<std::string> fanin_pool( netlist const& nl, std::vector<driver> const& drivers, std::vector<std::string> const& roots,
                                     std::set<std::string> const& excluded )
{
  std::set<std::string> names;
  std::vector<uint8_t> seen( nl.num_nets(), 0u );
  std::vector<net_id> stack;
  for ( auto const& r : roots )
  {
    stack.push_back( *nl.find_net( r ) );
  }
  for ( auto n : data_inputs( nl ) )
  {
    stack.push_back( n );
  }
  while ( !stack.empty() )
  {
    auto const n = stack.back();
    stack.pop_back();
    if ( seen[n] )
    {
      continue;
    }
    seen[n] = 1u;
    names.insert( nl.net_name( n ) );
    auto const& d = drivers[n];
    if ( d.what == driver::kind::gate )
    {
      stack.insert( stack.end(), nl.gates[d.index].fanins.begin(), nl.gates[d.index].fanins.end() );
    }
    else if ( d.what == driver::kind::tlg && nl.tlgs[d.index].stage == tlg_stage::combinational )
    {
      for ( auto const& name : nl.tlgs[d.index].spec.inputs )
      {
        stack.push_back( *nl.find_net( name ) );
      }
    }
  }
  std::vector<std::string> pool;
  for ( auto const& name : names )
  {
    if ( !excluded.contains( name ) && name != "0" && name != "1" && name.front() != '~' && name.back() != '*' )
    {
      pool.push_back( name );
    }
  }
  return pool;
}

} // namespace

hybrid_result hybridize( netlist const& input, hybridize_params const& params )
{
  if ( params.max_inputs < 1 || params.max_inputs > 10 )
  {
    throw contract_error( "max inputs must lie in 1..10" );
  }
  auto const clocks = clock_nets( input );
  if ( clocks.size() > 1 )
  {
    throw netlist_error( netlist_errc::unsupported, fmt::format( "{} clock domains, only one is supported", clocks.size() ) );
  }
  validate( input );

  hybrid_result result{ input, {}, {} };
  auto& nl = result.nl;
  auto& report = result.report;
  result.key.seed = params.seed;
  report.flops_before = static_cast<uint32_t>( input.latches.size() );
  report.combinational_before = static_cast<uint32_t>( input.gates.size() );

  std::vector<uint32_t> order( input.latches.size() );
  std::iota( order.begin(), order.end(), 0u );
  std::ranges::sort( order, [&]( uint32_t a, uint32_t b ) { return input.net_name( input.latches[a].q ) < input.net_name( input.latches[b].q ); } );

  /* analysis on the unmodified netlist */
  auto const consumers = compute_consumers( input );
  std::vector<candidate> chosen;
  for ( auto flop : order )
  {
    if ( input.latches[flop].init )
    {
      continue;
    }
    if ( auto c = best_candidate( input, consumers, flop, params ) )
    {
      chosen.push_back( std::move( *c ) );
    }
  }

  /* commit in flop-name order */
  std::set<uint32_t> removed_latches, sweep;
  std::set<std::string> taken;
  std::vector<tlg_instance> cells;
  for ( auto const& c : chosen )
  {
    auto const& l = input.latches[c.latch];
    auto const q = input.net_name( l.q );
    std::vector<std::string> leaves;
    for ( auto n : c.leaves )
    {
      leaves.push_back( input.net_name( n ) );
    }
    removed_latches.insert( c.latch );
    sweep.insert( c.cone.begin(), c.cone.end() );

    replacement r{ q, fresh_name( nl, taken, "tlg_" + q ), leaves, "", c.variant, c.absorbed };
    if ( c.tf )
    {
      r.function = to_string( *c.tf );
      tlg_instance t{ r.instance, l.q, c.variant, tlg_stage::sequential, l.clock, map_threshold_function( *c.tf, leaves, 0u, params.cell_sizes ) };
      cells.push_back( std::move( t ) );
    }
    else
    {
      r.function = c.inverted ? "XNOR3" : "XOR3";
      auto const internal = fresh_name( nl, taken, q + "_g" );
      auto const macro = make_xor3_macro( leaves, internal, c.inverted );
      auto const first_name = fresh_name( nl, taken, "tlg_" + q + "_m" );
      cell_variant const first_variant{ 3u, clamp_decoys( 3u, params.decoys ) };
      cells.push_back( { first_name, nl.add_net( internal ), first_variant, tlg_stage::combinational, l.clock, macro.first } );
      cells.push_back( { r.instance, l.q, c.variant, tlg_stage::sequential, l.clock, macro.second } );
      ++report.macros;
    }
    report.replacements.push_back( std::move( r ) );
  }

  std::vector<latch> latches;
  for ( uint32_t i = 0; i < nl.latches.size(); ++i )
  {
    if ( !removed_latches.contains( i ) )
    {
      latches.push_back( nl.latches[i] );
    }
  }
  nl.latches = std::move( latches );
  nl.tlgs.insert( nl.tlgs.end(), cells.begin(), cells.end() );

  /* drop cone gates left without consumers */
  std::vector<uint8_t> dead( nl.gates.size(), 0u );
  for ( bool changed = true; changed; )
  {
    changed = false;
    std::vector<uint32_t> uses( nl.num_nets(), 0u );
    for ( uint32_t i = 0; i < nl.gates.size(); ++i )
    {
      if ( !dead[i] )
      {
        for ( auto f : nl.gates[i].fanins )
        {
          ++uses[f];
        }
      }
    }
    for ( auto const& l : nl.latches )
    {
      ++uses[l.d];
    }
    for ( auto const& t : nl.tlgs )
    {
      for ( auto const& name : t.spec.inputs )
      {
        ++uses[*nl.find_net( name )];
      }
    }
    for ( auto n : nl.outputs )
    {
      ++uses[n];
    }
    for ( auto g : sweep )
    {
      if ( !dead[g] && uses[nl.gates[g].output] == 0 )
      {
        dead[g] = 1u;
        changed = true;
      }
    }
  }
  std::vector<gate> gates;
  for ( uint32_t i = 0; i < nl.gates.size(); ++i )
  {
    if ( !dead[i] )
    {
      gates.push_back( std::move( nl.gates[i] ) );
    }
  }
  nl.gates = std::move( gates );

  /* obfuscation with one generator shared across the pass */
  std::mt19937_64 rng( params.seed );
  auto const drivers = compute_drivers( nl );
  std::set<std::string> excluded( clocks.begin(), clocks.end() );
  for ( size_t i = nl.tlgs.size() - cells.size(); i < nl.tlgs.size(); ++i )
  {
    auto& t = nl.tlgs[i];
    auto pool = fanin_pool( nl, drivers, t.spec.inputs, excluded );
    std::erase( pool, nl.net_name( t.output ) );
    auto [spec, key] = obfuscate_instance( t.spec, t.variant, pool, rng );
    t.spec = visible_structure( spec );
    if ( t.variant.k > 0 )
    {
      result.key.instances.emplace( t.name, std::move( key ) );
    }
    ++report.tlgs_by_variant[fmt::format( "TLG-{}/{}", t.variant.n, t.variant.k )];
  }
  nl.key_ref = result.key.instances.empty() ? std::string{} : params.key_ref;
  nl.compact();
  validate( nl );

  report.flops_after = static_cast<uint32_t>( nl.latches.size() );
  report.combinational_after = static_cast<uint32_t>( nl.gates.size() );
  report.absorbed = report.combinational_before - report.combinational_after;
  return result;
}

} // namespace tlobf
