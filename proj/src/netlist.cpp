#include <tlobf/netlist.hpp>

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include <tlobf/errors.hpp>

namespace tlobf
{

namespace
{

struct gate_info
{
  gate_type type;
  std::string_view name;
  uint32_t arity;
  uint64_t bits;
};

constexpr std::array<gate_info, 11> primitive_gates{ {
    { gate_type::const0, "CONST0", 0, 0x0 },
    { gate_type::const1, "CONST1", 0, 0x1 },
    { gate_type::buf, "BUF", 1, 0x2 },
    { gate_type::inv, "INV", 1, 0x1 },
    { gate_type::and2, "AND2", 2, 0x8 },
    { gate_type::nand2, "NAND2", 2, 0x7 },
    { gate_type::or2, "OR2", 2, 0xe },
    { gate_type::nor2, "NOR2", 2, 0x1 },
    { gate_type::xor2, "XOR2", 2, 0x6 },
    { gate_type::xnor2, "XNOR2", 2, 0x9 },
    { gate_type::maj3, "MAJ3", 3, 0xe8 },
} };

truth_table table_of( gate_info const& info )
{
  truth_table tt( info.arity );
  for ( uint64_t i = 0; i < tt.num_bits(); ++i )
  {
    if ( ( info.bits >> i ) & 1u )
    {
      tt.set_bit( i, true );
    }
  }
  return tt;
}

} // namespace

std::string_view gate_type_name( gate_type type )
{
  if ( type == gate_type::lut )
  {
    return "LUT";
  }
  return primitive_gates[static_cast<size_t>( type )].name;
}

truth_table gate_function( gate_type type )
{
  if ( type == gate_type::lut )
  {
    throw contract_error( "a LUT gate has no fixed function" );
  }
  return table_of( primitive_gates[static_cast<size_t>( type )] );
}

gate_type classify_gate( truth_table const& function )
{
  for ( auto const& info : primitive_gates )
  {
    if ( info.arity == function.num_vars() && table_of( info ) == function )
    {
      return info.type;
    }
  }
  return gate_type::lut;
}

std::string_view errc_name( netlist_errc code )
{
  switch ( code )
  {
  case netlist_errc::syntax:
    return "syntax";
  case netlist_errc::multiple_drivers:
    return "multiple_drivers";
  case netlist_errc::undriven_net:
    return "undriven_net";
  case netlist_errc::combinational_loop:
    return "combinational_loop";
  default:
    return "unsupported";
  }
}

netlist_error::netlist_error( netlist_errc code, std::string const& message, uint32_t line, uint32_t column )
    : std::runtime_error( line ? fmt::format( "{}:{}: {}: {}", line, column, errc_name( code ), message )
                               : fmt::format( "{}: {}", errc_name( code ), message ) ),
      code_( code ), line_( line ), column_( column )
{
}

net_id netlist::add_net( std::string const& name )
{
  if ( name.empty() )
  {
    throw contract_error( "net names must not be empty" );
  }
  auto const [it, inserted] = ids_.emplace( name, static_cast<net_id>( names_.size() ) );
  if ( !inserted )
  {
    throw contract_error( fmt::format( "net `{}` already exists", name ) );
  }
  names_.push_back( name );
  return it->second;
}

net_id netlist::net( std::string const& name )
{
  if ( auto const it = ids_.find( name ); it != ids_.end() )
  {
    return it->second;
  }
  return add_net( name );
}

std::optional<net_id> netlist::find_net( std::string const& name ) const
{
  if ( auto const it = ids_.find( name ); it != ids_.end() )
  {
    return it->second;
  }
  return std::nullopt;
}

void netlist::compact()
{
  std::vector<uint8_t> used( names_.size(), 0u );
  auto mark = [&]( net_id n ) { used.at( n ) = 1u; };
  std::ranges::for_each( inputs, mark );
  std::ranges::for_each( outputs, mark );
  for ( auto const& g : gates )
  {
    std::ranges::for_each( g.fanins, mark );
    mark( g.output );
  }
  for ( auto const& l : latches )
  {
    mark( l.d );
    mark( l.q );
  }
  for ( auto const& t : tlgs )
  {
    mark( t.output );
    for ( auto const& name : t.spec.inputs )
    {
      mark( ids_.at( name ) );
    }
  }

  std::vector<net_id> remap( names_.size(), 0u );
  std::vector<std::string> names;
  for ( net_id n = 0; n < names_.size(); ++n )
  {
    if ( used[n] )
    {
      remap[n] = static_cast<net_id>( names.size() );
      names.push_back( names_[n] );
    }
  }
  auto fix = [&]( net_id& n ) { n = remap[n]; };
  std::ranges::for_each( inputs, fix );
  std::ranges::for_each( outputs, fix );
  for ( auto& g : gates )
  {
    std::ranges::for_each( g.fanins, fix );
    fix( g.output );
  }
  for ( auto& l : latches )
  {
    fix( l.d );
    fix( l.q );
  }
  for ( auto& t : tlgs )
  {
    fix( t.output );
  }
  names_ = std::move( names );
  ids_.clear();
  for ( net_id n = 0; n < names_.size(); ++n )
  {
    ids_.emplace( names_[n], n );
  }
}

std::vector<driver> compute_drivers( netlist const& nl )
{
  std::vector<driver> drivers( nl.num_nets() );
  auto claim = [&]( net_id n, driver d ) {
    if ( drivers.at( n ).what != driver::kind::none )
    {
      throw netlist_error( netlist_errc::multiple_drivers, fmt::format( "net `{}` has more than one driver", nl.net_name( n ) ) );
    }
    drivers[n] = d;
  };
  for ( auto n : nl.inputs )
  {
    claim( n, { driver::kind::input, 0 } );
  }
  for ( uint32_t i = 0; i < nl.gates.size(); ++i )
  {
    claim( nl.gates[i].output, { driver::kind::gate, i } );
  }
  for ( uint32_t i = 0; i < nl.latches.size(); ++i )
  {
    claim( nl.latches[i].q, { driver::kind::latch, i } );
  }
  for ( uint32_t i = 0; i < nl.tlgs.size(); ++i )
  {
    claim( nl.tlgs[i].output, { driver::kind::tlg, i } );
  }
  return drivers;
}

std::vector<driver> topological_order( netlist const& nl )
{
  auto const drivers = compute_drivers( nl );

  /* combinational nodes: gates first, then combinational cells */
  uint32_t const num_gates = static_cast<uint32_t>( nl.gates.size() );
  auto node_of = [&]( net_id n ) -> std::optional<uint32_t> {
    auto const& d = drivers[n];
    if ( d.what == driver::kind::gate )
    {
      return d.index;
    }
    if ( d.what == driver::kind::tlg && nl.tlgs[d.index].stage == tlg_stage::combinational )
    {
      return num_gates + d.index;
    }
    return std::nullopt;
  };
  auto fanins_of = [&]( uint32_t node ) {
    std::vector<net_id> result;
    if ( node < num_gates )
    {
      result = nl.gates[node].fanins;
    }
    else
    {
      for ( auto const& name : nl.tlgs[node - num_gates].spec.inputs )
      {
        result.push_back( *nl.find_net( name ) );
      }
    }
    return result;
  };

  uint32_t const num_nodes = num_gates + static_cast<uint32_t>( nl.tlgs.size() );
  std::vector<uint8_t> state( num_nodes, 0u ); /* 0 new, 1 on stack, 2 done */
  std::vector<driver> order;
  std::vector<std::pair<uint32_t, std::vector<net_id>>> stack;

  for ( uint32_t root = 0; root < num_nodes; ++root )
  {
    if ( root >= num_gates && nl.tlgs[root - num_gates].stage != tlg_stage::combinational )
    {
      continue;
    }
    if ( state[root] )
    {
      continue;
    }
    state[root] = 1u;
    stack.emplace_back( root, fanins_of( root ) );
    while ( !stack.empty() )
    {
      auto& [node, pending] = stack.back();
      if ( pending.empty() )
      {
        state[node] = 2u;
        order.push_back( node < num_gates ? driver{ driver::kind::gate, node } : driver{ driver::kind::tlg, node - num_gates } );
        stack.pop_back();
        continue;
      }
      auto const n = pending.back();
      pending.pop_back();
      auto const child = node_of( n );
      if ( !child )
      {
        continue;
      }
      if ( state[*child] == 1u )
      {
        throw netlist_error( netlist_errc::combinational_loop, fmt::format( "combinational loop through net `{}`", nl.net_name( n ) ) );
      }
      if ( state[*child] == 0u )
      {
        state[*child] = 1u;
        stack.emplace_back( *child, fanins_of( *child ) );
      }
    }
  }
  return order;
}

void validate( netlist const& nl )
{
  auto const drivers = compute_drivers( nl );
  auto check = [&]( net_id n, std::string_view user ) {
    if ( drivers.at( n ).what == driver::kind::none )
    {
      throw netlist_error( netlist_errc::undriven_net, fmt::format( "net `{}` used by {} has no driver", nl.net_name( n ), user ) );
    }
  };
  for ( auto n : nl.outputs )
  {
    check( n, "an output" );
  }
  for ( auto const& g : nl.gates )
  {
    if ( g.function.num_vars() != g.fanins.size() )
    {
      throw contract_error( fmt::format( "gate driving `{}` has a function of the wrong arity", nl.net_name( g.output ) ) );
    }
    for ( auto n : g.fanins )
    {
      check( n, fmt::format( "the gate driving `{}`", nl.net_name( g.output ) ) );
    }
  }
  for ( auto const& l : nl.latches )
  {
    check( l.d, fmt::format( "the flop driving `{}`", nl.net_name( l.q ) ) );
  }
  for ( auto const& t : nl.tlgs )
  {
    for ( auto const& name : t.spec.inputs )
    {
      auto const n = nl.find_net( name );
      if ( !n )
      {
        throw netlist_error( netlist_errc::undriven_net, fmt::format( "net `{}` used by cell `{}` does not exist", name, t.name ) );
      }
      check( *n, fmt::format( "cell `{}`", t.name ) );
    }
  }
  topological_order( nl );
}

std::vector<std::string> clock_nets( netlist const& nl )
{
  std::set<std::string> clocks;
  for ( auto const& l : nl.latches )
  {
    if ( !l.clock.empty() )
    {
      clocks.insert( l.clock );
    }
  }
  for ( auto const& t : nl.tlgs )
  {
    if ( !t.clock.empty() )
    {
      clocks.insert( t.clock );
    }
  }
  return { clocks.begin(), clocks.end() };
}

std::vector<net_id> data_inputs( netlist const& nl )
{
  auto const clocks = clock_nets( nl );
  std::vector<net_id> result;
  for ( auto n : nl.inputs )
  {
    if ( std::ranges::find( clocks, nl.net_name( n ) ) == clocks.end() )
    {
      result.push_back( n );
    }
  }
  return result;
}

namespace
{

std::vector<std::string> names_of( netlist const& nl, std::vector<net_id> const& nets )
{
  std::vector<std::string> result;
  for ( auto n : nets )
  {
    result.push_back( nl.net_name( n ) );
  }
  return result;
}

std::vector<std::string> slot_tokens( differential_spec const& spec, std::vector<slot> const& slots )
{
  std::vector<std::string> result;
  for ( auto const& s : slots )
  {
    switch ( s.drive )
    {
    case slot_drive::tie0:
      result.push_back( "0" );
      break;
    case slot_drive::tie1:
      result.push_back( "1" );
      break;
    default:
      result.push_back( ( s.complemented ? "~" : "" ) + spec.inputs.at( s.input ) );
    }
    result.back() += s.vt == vt_class::high ? "*" : "";
  }
  return result;
}

std::set<std::string> used_net_names( netlist const& nl )
{
  std::set<std::string> result;
  auto add = [&]( net_id n ) { result.insert( nl.net_name( n ) ); };
  std::ranges::for_each( nl.inputs, add );
  std::ranges::for_each( nl.outputs, add );
  for ( auto const& g : nl.gates )
  {
    std::ranges::for_each( g.fanins, add );
    add( g.output );
  }
  for ( auto const& l : nl.latches )
  {
    add( l.d );
    add( l.q );
  }
  for ( auto const& t : nl.tlgs )
  {
    add( t.output );
    result.insert( t.spec.inputs.begin(), t.spec.inputs.end() );
  }
  return result;
}

} // namespace

bool structurally_equal( netlist const& a, netlist const& b )
{
  if ( a.model() != b.model() || names_of( a, a.inputs ) != names_of( b, b.inputs ) ||
       names_of( a, a.outputs ) != names_of( b, b.outputs ) || a.gates.size() != b.gates.size() ||
       a.latches.size() != b.latches.size() || a.tlgs.size() != b.tlgs.size() || a.key_ref != b.key_ref )
  {
    return false;
  }
  for ( size_t i = 0; i < a.gates.size(); ++i )
  {
    auto const& ga = a.gates[i];
    auto const& gb = b.gates[i];
    if ( ga.type != gb.type || ga.function != gb.function || names_of( a, ga.fanins ) != names_of( b, gb.fanins ) ||
         a.net_name( ga.output ) != b.net_name( gb.output ) )
    {
      return false;
    }
  }
  for ( size_t i = 0; i < a.latches.size(); ++i )
  {
    auto const& la = a.latches[i];
    auto const& lb = b.latches[i];
    if ( a.net_name( la.d ) != b.net_name( lb.d ) || a.net_name( la.q ) != b.net_name( lb.q ) || la.type != lb.type ||
         la.clock != lb.clock || la.init != lb.init )
    {
      return false;
    }
  }
  for ( size_t i = 0; i < a.tlgs.size(); ++i )
  {
    auto const& ta = a.tlgs[i];
    auto const& tb = b.tlgs[i];
    if ( ta.name != tb.name || a.net_name( ta.output ) != b.net_name( tb.output ) || ta.variant != tb.variant ||
         ta.stage != tb.stage || ta.clock != tb.clock || ta.spec.cell_size != tb.spec.cell_size ||
         ta.spec.reserved_decoys != tb.spec.reserved_decoys ||
         slot_tokens( ta.spec, ta.spec.left ) != slot_tokens( tb.spec, tb.spec.left ) ||
         slot_tokens( ta.spec, ta.spec.right ) != slot_tokens( tb.spec, tb.spec.right ) )
    {
      return false;
    }
  }
  return used_net_names( a ) == used_net_names( b );
}

netlist_stats stats( netlist const& nl )
{
  netlist_stats s;
  for ( auto const& g : nl.gates )
  {
    ++s.gates_by_type[std::string( gate_type_name( g.type ) )];
  }
  for ( auto const& t : nl.tlgs )
  {
    ++s.tlgs_by_variant[fmt::format( "TLG-{}/{}", t.variant.n, t.variant.k )];
  }
  s.combinational = static_cast<uint32_t>( nl.gates.size() );
  s.flops = static_cast<uint32_t>( nl.latches.size() );
  s.tlgs = static_cast<uint32_t>( nl.tlgs.size() );
  s.sequential = s.flops + static_cast<uint32_t>( std::ranges::count_if( nl.tlgs, []( auto const& t ) { return t.stage == tlg_stage::sequential; } ) );
  s.nets = static_cast<uint32_t>( used_net_names( nl ).size() );
  s.inputs = static_cast<uint32_t>( nl.inputs.size() );
  s.outputs = static_cast<uint32_t>( nl.outputs.size() );
  return s;
}

} // namespace tlobf
