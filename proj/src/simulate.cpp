#include <tlobf/simulate.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include <tlobf/errors.hpp>

namespace tlobf
{

simulator::simulator( netlist const& nl, obfuscation_key const* key )
    : nl_( nl ), inputs_( data_inputs( nl ) ), order_( topological_order( nl ) )
{
  for ( auto const& t : nl.tlgs )
  {
    cell c;
    auto const entry = key ? key->instances.find( t.name ) : decltype( key->instances.end() ){};
    bool const has_entry = key && entry != key->instances.end();
    if ( t.variant.k > 0 && !has_entry )
    {
      throw key_required_error( fmt::format( "cell `{}` is obfuscated and the key has no entry for it", t.name ) );
    }
    c.spec = has_entry ? apply_key( t.spec, entry->second ) : t.spec;
    for ( auto const& name : c.spec.inputs )
    {
      auto const n = nl.find_net( name );
      if ( !n )
      {
        throw contract_error( fmt::format( "cell `{}` reads unknown net `{}`", t.name, name ) );
      }
      c.nets.push_back( *n );
    }
    cells_.push_back( std::move( c ) );
  }
  activity_.toggles.assign( nl.num_nets(), 0u );
  activity_.tlg_evaluations.assign( nl.tlgs.size(), 0u );
  reset();
}

void simulator::reset()
{
  values_.assign( nl_.num_nets(), 0u );
  previous_.assign( nl_.num_nets(), 0u );
  state_.assign( nl_.latches.size() + nl_.tlgs.size(), 0u );
  for ( size_t i = 0; i < nl_.latches.size(); ++i )
  {
    state_[i] = nl_.latches[i].init ? 1u : 0u;
  }
}

bool simulator::eval_cell( uint32_t index )
{
  auto const& c = cells_[index];
  scratch_.resize( c.nets.size() );
  for ( size_t i = 0; i < c.nets.size(); ++i )
  {
    scratch_[i] = values_[c.nets[i]];
  }
  ++activity_.tlg_evaluations[index];
  ++activity_.tlg_evals_per_cycle.back();
  try
  {
    return eval_diff( c.spec, scratch_ );
  }
  catch ( tie_violation const& e )
  {
    throw tie_violation( fmt::format( "cell `{}`: {}", nl_.tlgs[index].name, e.what() ), e.witness() );
  }
}

std::vector<uint8_t> simulator::step( std::span<const uint8_t> inputs )
{
  if ( inputs.size() != inputs_.size() )
  {
    throw contract_error( fmt::format( "stimulus vector has {} bits, the design has {} data inputs", inputs.size(), inputs_.size() ) );
  }
  activity_.tlg_evals_per_cycle.push_back( 0u );
  std::ranges::fill( values_, 0u );
  for ( size_t i = 0; i < inputs_.size(); ++i )
  {
    values_[inputs_[i]] = inputs[i] ? 1u : 0u;
  }
  auto const num_latches = nl_.latches.size();
  for ( size_t i = 0; i < num_latches; ++i )
  {
    values_[nl_.latches[i].q] = state_[i];
  }
  for ( size_t i = 0; i < nl_.tlgs.size(); ++i )
  {
    if ( nl_.tlgs[i].stage == tlg_stage::sequential )
    {
      values_[nl_.tlgs[i].output] = state_[num_latches + i];
    }
  }
  for ( auto const& d : order_ )
  {
    if ( d.what == driver::kind::gate )
    {
      auto const& g = nl_.gates[d.index];
      uint64_t index = 0;
      for ( size_t j = 0; j < g.fanins.size(); ++j )
      {
        index |= static_cast<uint64_t>( values_[g.fanins[j]] ) << j;
      }
      values_[g.output] = g.function.get_bit( index ) ? 1u : 0u;
    }
    else
    {
      values_[nl_.tlgs[d.index].output] = eval_cell( d.index ) ? 1u : 0u;
    }
  }

  std::vector<uint8_t> outputs;
  outputs.reserve( nl_.outputs.size() );
  for ( auto n : nl_.outputs )
  {
    outputs.push_back( values_[n] );
  }
  for ( size_t n = 0; n < values_.size(); ++n )
  {
    activity_.toggles[n] += values_[n] != previous_[n];
  }
  previous_ = values_;

  for ( size_t i = 0; i < num_latches; ++i )
  {
    state_[i] = values_[nl_.latches[i].d];
  }
  for ( uint32_t i = 0; i < nl_.tlgs.size(); ++i )
  {
    if ( nl_.tlgs[i].stage == tlg_stage::sequential )
    {
      state_[num_latches + i] = eval_cell( i ) ? 1u : 0u;
    }
  }
  ++activity_.cycles;
  return outputs;
}

sim_trace simulate( netlist const& nl, obfuscation_key const* key, stimulus const& inputs )
{
  simulator sim( nl, key );
  sim_trace trace;
  for ( auto n : nl.outputs )
  {
    trace.output_names.push_back( nl.net_name( n ) );
  }
  for ( auto const& v : inputs )
  {
    trace.outputs.push_back( sim.step( v ) );
  }
  trace.activity = sim.activity();
  return trace;
}

stimulus random_activity_stimulus( uint32_t width, uint64_t cycles, double toggle_probability, uint64_t seed )
{
  if ( toggle_probability < 0.0 || toggle_probability > 1.0 )
  {
    throw contract_error( "toggle probability must lie in [0, 1]" );
  }
  std::mt19937_64 rng( seed );
  std::bernoulli_distribution coin( 0.5 ), flip( toggle_probability );
  stimulus s;
  s.reserve( cycles );
  std::vector<uint8_t> current( width );
  for ( uint64_t c = 0; c < cycles; ++c )
  {
    for ( auto& bit : current )
    {
      bit = c == 0 ? coin( rng ) : bit ^ static_cast<uint8_t>( flip( rng ) );
    }
    s.push_back( current );
  }
  return s;
}

stimulus random_stimulus( uint32_t width, uint64_t cycles, uint64_t seed )
{
  std::mt19937_64 rng( seed );
  stimulus s( cycles, std::vector<uint8_t>( width ) );
  for ( auto& v : s )
  {
    for ( auto& bit : v )
    {
      bit = static_cast<uint8_t>( rng() >> 63 );
    }
  }
  return s;
}

double toggle_rate( stimulus const& s )
{
  if ( s.size() < 2 || s.front().empty() )
  {
    return 0.0;
  }
  uint64_t flips = 0;
  for ( size_t c = 1; c < s.size(); ++c )
  {
    for ( size_t i = 0; i < s[c].size(); ++i )
    {
      flips += s[c][i] != s[c - 1][i];
    }
  }
  return static_cast<double>( flips ) / static_cast<double>( ( s.size() - 1 ) * s.front().size() );
}

uint32_t sequential_depth( netlist const& nl )
{
  auto const drivers = compute_drivers( nl );
  auto const num_latches = static_cast<uint32_t>( nl.latches.size() );
  /* sequential element id: latch index, or num_latches + cell index */
  auto seq_id = [&]( net_id n ) -> std::optional<uint32_t> {
    auto const& d = drivers[n];
    if ( d.what == driver::kind::latch )
    {
      return d.index;
    }
    if ( d.what == driver::kind::tlg && nl.tlgs[d.index].stage == tlg_stage::sequential )
    {
      return num_latches + d.index;
    }
    return std::nullopt;
  };
  auto sources = [&]( std::vector<net_id> const& roots ) {
    std::vector<uint32_t> result;
    std::vector<uint8_t> seen( nl.num_nets(), 0u );
    std::vector<net_id> stack( roots );
    while ( !stack.empty() )
    {
      auto const n = stack.back();
      stack.pop_back();
      if ( seen[n] )
      {
        continue;
      }
      seen[n] = 1u;
      if ( auto const s = seq_id( n ) )
      {
        result.push_back( *s );
        continue;
      }
      auto const& d = drivers[n];
      if ( d.what == driver::kind::gate )
      {
        stack.insert( stack.end(), nl.gates[d.index].fanins.begin(), nl.gates[d.index].fanins.end() );
      }
      else if ( d.what == driver::kind::tlg )
      {
        for ( auto const& name : nl.tlgs[d.index].spec.inputs )
        {
          stack.push_back( *nl.find_net( name ) );
        }
      }
    }
    return result;
  };

  auto const num_seq = num_latches + static_cast<uint32_t>( nl.tlgs.size() );
  std::vector<std::vector<uint32_t>> preds( num_seq );
  for ( uint32_t i = 0; i < num_latches; ++i )
  {
    preds[i] = sources( { nl.latches[i].d } );
  }
  for ( uint32_t i = 0; i < nl.tlgs.size(); ++i )
  {
    if ( nl.tlgs[i].stage != tlg_stage::sequential )
    {
      continue;
    }
    std::vector<net_id> roots;
    for ( auto const& name : nl.tlgs[i].spec.inputs )
    {
      roots.push_back( *nl.find_net( name ) );
    }
    preds[num_latches + i] = sources( roots );
  }

  std::vector<uint32_t> depth( num_seq, 1u );
  for ( uint32_t round = 0; round <= num_seq; ++round )
  {
    bool changed = false;
    for ( uint32_t s = 0; s < num_seq; ++s )
    {
      for ( auto p : preds[s] )
      {
        if ( depth[p] + 1 > depth[s] && depth[p] + 1 <= num_seq )
        {
          depth[s] = depth[p] + 1;
          changed = true;
        }
      }
    }
    if ( !changed )
    {
      break;
    }
  }
  uint32_t result = 0;
  for ( auto s : sources( nl.outputs ) )
  {
    result = std::max( result, depth[s] );
  }
  return result;
}

stimulus exhaustive_stimulus( uint32_t width, uint32_t depth )
{
  if ( width > 20 )
  {
    throw capacity_error( "exhaustive stimulus is limited to 20 inputs" );
  }
  uint64_t const count = uint64_t{ 1 } << width;
  stimulus s;
  s.reserve( count * ( depth + 2 ) );
  auto vector_of = [&]( uint64_t m ) {
    std::vector<uint8_t> v( width );
    for ( uint32_t i = 0; i < width; ++i )
    {
      v[i] = static_cast<uint8_t>( ( m >> i ) & 1u );
    }
    return v;
  };
  for ( uint64_t m = 0; m < count; ++m )
  {
    s.push_back( vector_of( m ) );
  }
  for ( uint64_t m = 0; m < count; ++m )
  {
    for ( uint32_t r = 0; r <= depth; ++r )
    {
      s.push_back( vector_of( m ) );
    }
  }
  return s;
}

namespace
{

std::vector<std::string> sorted_names( netlist const& nl, std::vector<net_id> const& nets )
{
  std::vector<std::string> names;
  for ( auto n : nets )
  {
    names.push_back( nl.net_name( n ) );
  }
  std::ranges::sort( names );
  return names;
}

} // namespace

equivalence_result check_equivalence( netlist const& a, obfuscation_key const* key_a, netlist const& b, obfuscation_key const* key_b,
                                      equivalence_params const& params )
{
  auto const in_a = data_inputs( a );
  auto const in_b = data_inputs( b );
  if ( sorted_names( a, in_a ) != sorted_names( b, in_b ) || sorted_names( a, a.outputs ) != sorted_names( b, b.outputs ) ||
       a.outputs.size() != b.outputs.size() )
  {
    throw contract_error( "designs do not share the same inputs and outputs" );
  }

  equivalence_result result;
  for ( auto n : in_a )
  {
    result.input_names.push_back( a.net_name( n ) );
  }
  for ( auto n : a.outputs )
  {
    result.output_names.push_back( a.net_name( n ) );
  }
  /* position in b's vectors of each of a's inputs and outputs */
  std::vector<size_t> in_map, out_map;
  for ( auto n : in_a )
  {
    auto const it = std::ranges::find_if( in_b, [&]( net_id m ) { return b.net_name( m ) == a.net_name( n ); } );
    in_map.push_back( static_cast<size_t>( it - in_b.begin() ) );
  }
  for ( auto n : a.outputs )
  {
    auto const it = std::ranges::find_if( b.outputs, [&]( net_id m ) { return b.net_name( m ) == a.net_name( n ); } );
    out_map.push_back( static_cast<size_t>( it - b.outputs.begin() ) );
  }

  auto const width = static_cast<uint32_t>( in_a.size() );
  stimulus s;
  if ( params.mode == equivalence_mode::exhaustive )
  {
    auto const depth = std::max( sequential_depth( a ), sequential_depth( b ) );
    if ( width > 20 || ( ( uint64_t{ 1 } << width ) * ( depth + 2 ) ) > params.max_cycles )
    {
      throw contract_error( fmt::format( "exhaustive check needs {} inputs held over depth {}, beyond the cycle cap", width, depth ) );
    }
    s = exhaustive_stimulus( width, depth );
  }
  else
  {
    s = random_stimulus( width, params.vectors, params.seed );
  }

  simulator sim_a( a, key_a ), sim_b( b, key_b );
  std::vector<uint8_t> vb( width );
  for ( uint64_t c = 0; c < s.size(); ++c )
  {
    for ( size_t i = 0; i < width; ++i )
    {
      vb[in_map[i]] = s[c][i];
    }
    std::vector<uint8_t> out_a, out_b;
    try
    {
      out_a = sim_a.step( s[c] );
    }
    catch ( tie_violation const& e )
    {
      result.reason = fmt::format( "first design: {}", e.what() );
    }
    if ( result.reason.empty() )
    {
      try
      {
        auto const raw = sim_b.step( vb );
        for ( auto p : out_map )
        {
          out_b.push_back( raw[p] );
        }
      }
      catch ( tie_violation const& e )
      {
        result.reason = fmt::format( "second design: {}", e.what() );
      }
    }
    if ( result.reason.empty() && out_a != out_b )
    {
      auto const bit = std::ranges::mismatch( out_a, out_b ).in1 - out_a.begin();
      result.reason = fmt::format( "output `{}` differs in cycle {}", result.output_names[bit], c );
    }
    result.cycles_checked = c + 1;
    if ( !result.reason.empty() )
    {
      result.equivalent = false;
      result.trace.assign( s.begin(), s.begin() + static_cast<std::ptrdiff_t>( c + 1 ) );
      result.expected = out_a;
      result.actual = out_b;
      return result;
    }
  }
  return result;
}

power_proxy compute_power_proxy( netlist const& nl, activity const& act, double tlg_unit_cost )
{
  power_proxy p;
  auto const drivers = compute_drivers( nl );
  for ( net_id n = 0; n < nl.num_nets() && n < act.toggles.size(); ++n )
  {
    if ( drivers[n].what == driver::kind::gate || drivers[n].what == driver::kind::latch )
    {
      p.cmos_toggles += act.toggles[n];
    }
  }
  uint64_t evaluations = 0;
  for ( auto e : act.tlg_evaluations )
  {
    evaluations += e;
  }
  p.tlg_cost = tlg_unit_cost * static_cast<double>( evaluations );
  if ( !act.tlg_evals_per_cycle.empty() )
  {
    double const cycles = static_cast<double>( act.tlg_evals_per_cycle.size() );
    double sum = 0.0;
    for ( auto e : act.tlg_evals_per_cycle )
    {
      sum += tlg_unit_cost * static_cast<double>( e );
    }
    p.tlg_cost_per_cycle_mean = sum / cycles;
    double sq = 0.0;
    for ( auto e : act.tlg_evals_per_cycle )
    {
      auto const d = tlg_unit_cost * static_cast<double>( e ) - p.tlg_cost_per_cycle_mean;
      sq += d * d;
    }
    p.tlg_cost_per_cycle_variance = sq / cycles;
  }
  return p;
}

namespace
{

std::string vcd_id( uint32_t index )
{
  std::string id;
  do
  {
    id += static_cast<char>( '!' + index % 94 );
    index /= 94;
  } while ( index );
  return id;
}

} // namespace

void write_vcd( std::ostream& os, netlist const& nl, obfuscation_key const* key, stimulus const& inputs )
{
  simulator sim( nl, key );
  auto const clocks = clock_nets( nl );
  std::optional<net_id> clock_net;
  if ( !clocks.empty() )
  {
    clock_net = nl.find_net( clocks.front() );
  }
  uint32_t const clock_index = nl.num_nets();

  os << "$timescale 1ns $end\n";
  os << fmt::format( "$scope module {} $end\n", nl.model() );
  for ( net_id n = 0; n < nl.num_nets(); ++n )
  {
    if ( clock_net && *clock_net == n )
    {
      continue;
    }
    os << fmt::format( "$var wire 1 {} {} $end\n", vcd_id( n ), nl.net_name( n ) );
  }
  os << fmt::format( "$var wire 1 {} {} $end\n", vcd_id( clock_index ), clock_net ? nl.net_name( *clock_net ) : "clk" );
  os << "$upscope $end\n$enddefinitions $end\n";

  std::vector<int> last( nl.num_nets(), -1 );
  for ( uint64_t c = 0; c < inputs.size(); ++c )
  {
    sim.step( inputs[c] );
    os << fmt::format( "#{}\n", c * 10 );
    if ( c == 0 )
    {
      os << "$dumpvars\n";
    }
    os << fmt::format( "0{}\n", vcd_id( clock_index ) );
    for ( net_id n = 0; n < nl.num_nets(); ++n )
    {
      if ( clock_net && *clock_net == n )
      {
        continue;
      }
      int const v = sim.values()[n];
      if ( v != last[n] )
      {
        os << v << vcd_id( n ) << '\n';
        last[n] = v;
      }
    }
    if ( c == 0 )
    {
      os << "$end\n";
    }
    os << fmt::format( "#{}\n1{}\n", c * 10 + 5, vcd_id( clock_index ) );
  }
  os << fmt::format( "#{}\n", inputs.size() * 10 );
}

} // namespace tlobf
