#include <tlobf/bench.hpp>

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <optional>
#include <random>

#include <fmt/format.h>

#include <tlobf/errors.hpp>
#include <tlobf/simulate.hpp>

namespace tlobf
{

netlist_builder::netlist_builder( std::string model, std::string clock ) : nl_( std::move( model ) ), clock_( std::move( clock ) ) {}

std::string netlist_builder::fresh( std::string const& prefix )
{
  std::string name;
  do
  {
    name = fmt::format( "{}{}", prefix, counter_++ );
  } while ( nl_.find_net( name ) );
  return name;
}

net_id netlist_builder::input( std::string const& name )
{
  auto const n = nl_.add_net( name );
  nl_.inputs.push_back( n );
  return n;
}

void netlist_builder::output( net_id n )
{
  nl_.outputs.push_back( n );
}

net_id netlist_builder::gate( gate_type type, std::initializer_list<net_id> fanins, std::string const& name )
{
  return gate( type, std::vector<net_id>( fanins ), name );
}

net_id netlist_builder::gate( gate_type type, std::vector<net_id> const& fanins, std::string const& name )
{
  auto function = gate_function( type );
  if ( function.num_vars() != fanins.size() )
  {
    throw contract_error( fmt::format( "{} takes {} fanins", gate_type_name( type ), function.num_vars() ) );
  }
  auto const out = nl_.add_net( name.empty() ? fresh( "n" ) : name );
  nl_.gates.push_back( { type, fanins, out, std::move( function ) } );
  return out;
}

net_id netlist_builder::flop( net_id d, std::string const& name )
{
  if ( !nl_.find_net( clock_ ) )
  {
    input( clock_ );
  }
  auto const q = nl_.add_net( name.empty() ? fresh( "q" ) : name );
  nl_.latches.push_back( { d, q, "re", clock_, false } );
  return q;
}

net_id netlist_builder::constant( bool value )
{
  auto& cached = value ? const1_ : const0_;
  if ( !cached )
  {
    cached = gate( value ? gate_type::const1 : gate_type::const0, {}, fresh( value ? "one" : "zero" ) );
  }
  return *cached;
}

netlist netlist_builder::build()
{
  validate( nl_ );
  return nl_;
}

adder_bits full_adder( netlist_builder& b, net_id x, net_id y, net_id z )
{
  auto const s1 = b.gate( gate_type::xor2, { x, y } );
  auto const sum = b.gate( gate_type::xor2, { s1, z } );
  auto const c1 = b.gate( gate_type::and2, { x, y } );
  auto const c2 = b.gate( gate_type::and2, { s1, z } );
  return { sum, b.gate( gate_type::or2, { c1, c2 } ) };
}

adder_bits half_adder( netlist_builder& b, net_id x, net_id y )
{
  return { b.gate( gate_type::xor2, { x, y } ), b.gate( gate_type::and2, { x, y } ) };
}

namespace
{

using bits = std::vector<std::optional<net_id>>; /* LSB first, nullopt is constant 0 */

/* sum of a column's operands; the carry is skipped when `with_carry` is false */
std::pair<std::optional<net_id>, std::optional<net_id>> add_column( netlist_builder& b, std::vector<net_id> const& ops, bool with_carry )
{
  switch ( ops.size() )
  {
  case 0:
    return { std::nullopt, std::nullopt };
  case 1:
    return { ops[0], std::nullopt };
  case 2:
    if ( !with_carry )
    {
      return { b.gate( gate_type::xor2, { ops[0], ops[1] } ), std::nullopt };
    }
    else
    {
      auto const [s, c] = half_adder( b, ops[0], ops[1] );
      return { s, c };
    }
  default:
    if ( !with_carry )
    {
      return { b.gate( gate_type::xor2, { b.gate( gate_type::xor2, { ops[0], ops[1] } ), ops[2] } ), std::nullopt };
    }
    else
    {
      auto const [s, c] = full_adder( b, ops[0], ops[1], ops[2] );
      return { s, c };
    }
  }
}

/* ripple-carry a + b + cin modulo 2^width */
bits ripple_add( netlist_builder& b, bits const& x, bits const& y, bool carry_in )
{
  auto const width = std::max( x.size(), y.size() );
  bits result( width );
  std::optional<net_id> carry;
  if ( carry_in )
  {
    carry = b.constant( true );
  }
  for ( size_t i = 0; i < width; ++i )
  {
    std::vector<net_id> ops;
    for ( auto const* v : { &x, &y } )
    {
      if ( i < v->size() && ( *v )[i] )
      {
        ops.push_back( *( *v )[i] );
      }
    }
    if ( carry )
    {
      ops.push_back( *carry );
    }
    auto const [s, c] = add_column( b, ops, i + 1 < width );
    result[i] = s;
    carry = c;
  }
  return result;
}

net_id materialize( netlist_builder& b, std::optional<net_id> bit )
{
  return bit ? *bit : b.constant( false );
}

int64_t signed_value( uint64_t raw, uint32_t width )
{
  auto const mask = width >= 64 ? ~uint64_t{ 0 } : ( uint64_t{ 1 } << width ) - 1u;
  raw &= mask;
  if ( width < 64 && ( ( raw >> ( width - 1 ) ) & 1u ) )
  {
    return static_cast<int64_t>( raw ) - static_cast<int64_t>( uint64_t{ 1 } << width );
  }
  return static_cast<int64_t>( raw );
}

void check_width( uint32_t width, uint32_t stages )
{
  if ( width > 16 )
  {
    throw capacity_error( fmt::format( "bench width {} exceeds 16", width ) );
  }
  if ( width < 2 )
  {
    throw contract_error( "bench width must be at least 2" );
  }
  if ( stages < 1 || stages > 2 )
  {
    throw contract_error( "bench stages must be 1 or 2" );
  }
}

} // namespace

netlist generate_wallace( uint32_t width, uint32_t stages )
{
  check_width( width, stages );
  netlist_builder b( fmt::format( "wallace{}", width ) );
  std::vector<net_id> a, bb;
  for ( uint32_t i = 0; i < width; ++i )
  {
    a.push_back( b.input( fmt::format( "a{}", i ) ) );
  }
  for ( uint32_t i = 0; i < width; ++i )
  {
    bb.push_back( b.input( fmt::format( "b{}", i ) ) );
  }

  uint32_t const pw = 2 * width;
  std::vector<std::vector<net_id>> cols( pw );
  for ( uint32_t i = 0; i < width; ++i )
  {
    for ( uint32_t j = 0; j < width; ++j )
    {
      bool const inverted = ( i == width - 1 ) != ( j == width - 1 );
      cols[i + j].push_back( b.gate( inverted ? gate_type::nand2 : gate_type::and2, { a[i], bb[j] } ) );
    }
  }
  cols[width].push_back( b.constant( true ) );
  cols[pw - 1].push_back( b.constant( true ) );

  auto height = [&] { return std::ranges::max( cols, {}, &std::vector<net_id>::size ).size(); };
  while ( height() > 2 )
  {
    std::vector<std::vector<net_id>> next( pw );
    for ( uint32_t c = 0; c < pw; ++c )
    {
      auto const& col = cols[c];
      bool const top = c + 1 == pw;
      size_t i = 0;
      for ( ; i + 3 <= col.size(); i += 3 )
      {
        auto const [s, carry] = add_column( b, { col[i], col[i + 1], col[i + 2] }, !top );
        next[c].push_back( *s );
        if ( carry )
        {
          next[c + 1].push_back( *carry );
        }
      }
      if ( col.size() - i == 2 && col.size() >= 3 )
      {
        auto const [s, carry] = add_column( b, { col[i], col[i + 1] }, !top );
        next[c].push_back( *s );
        if ( carry )
        {
          next[c + 1].push_back( *carry );
        }
        i += 2;
      }
      for ( ; i < col.size(); ++i )
      {
        next[c].push_back( col[i] );
      }
    }
    cols = std::move( next );
  }

  if ( stages == 2 )
  {
    for ( uint32_t c = 0; c < pw; ++c )
    {
      for ( size_t r = 0; r < cols[c].size(); ++r )
      {
        cols[c][r] = b.flop( cols[c][r], fmt::format( "r{}_{}", r, c ) );
      }
    }
  }

  bits row0( pw ), row1( pw );
  for ( uint32_t c = 0; c < pw; ++c )
  {
    if ( cols[c].size() > 0 )
    {
      row0[c] = cols[c][0];
    }
    if ( cols[c].size() > 1 )
    {
      row1[c] = cols[c][1];
    }
  }
  auto const sum = ripple_add( b, row0, row1, false );
  for ( uint32_t c = 0; c < pw; ++c )
  {
    b.output( b.flop( materialize( b, sum[c] ), fmt::format( "p{}", c ) ) );
  }
  return b.build();
}

std::vector<int> default_fir_coefficients( uint32_t taps )
{
  static constexpr std::array<int, 8> pattern{ 3, -5, 7, 2, -1, 4, -3, 6 };
  std::vector<int> result;
  for ( uint32_t i = 0; i < taps; ++i )
  {
    result.push_back( pattern[i % pattern.size()] );
  }
  return result;
}

uint32_t fir_output_width( uint32_t width, std::vector<int> const& coefficients )
{
  uint64_t total = 0;
  for ( auto c : coefficients )
  {
    total += static_cast<uint64_t>( std::abs( c ) );
  }
  return width + static_cast<uint32_t>( std::bit_width( std::max<uint64_t>( total, 1u ) ) );
}

netlist generate_fir( uint32_t width, std::vector<int> const& coefficients, uint32_t stages )
{
  check_width( width, stages );
  if ( coefficients.empty() || coefficients.size() > 16 )
  {
    throw contract_error( "FIR needs between 1 and 16 taps" );
  }
  for ( auto c : coefficients )
  {
    if ( std::abs( c ) > 255 )
    {
      throw capacity_error( "FIR coefficients are limited to magnitude 255" );
    }
  }
  auto const ow = fir_output_width( width, coefficients );
  netlist_builder b( fmt::format( "fir{}x{}", width, coefficients.size() ) );
  std::vector<net_id> x;
  for ( uint32_t i = 0; i < width; ++i )
  {
    x.push_back( b.input( fmt::format( "x{}", i ) ) );
  }
  if ( stages == 2 )
  {
    for ( uint32_t i = 0; i < width; ++i )
    {
      x[i] = b.flop( x[i], fmt::format( "xr{}", i ) );
    }
  }

  auto product = [&]( int coefficient ) {
    auto const magnitude = static_cast<uint32_t>( std::abs( coefficient ) );
    bits acc( ow );
    for ( uint32_t s = 0; s < 32 && ( magnitude >> s ); ++s )
    {
      if ( !( ( magnitude >> s ) & 1u ) )
      {
        continue;
      }
      bits shifted( ow );
      for ( uint32_t j = s; j < ow; ++j )
      {
        shifted[j] = x[std::min( j - s, width - 1 )];
      }
      acc = std::ranges::all_of( acc, []( auto const& v ) { return !v.has_value(); } ) ? shifted : ripple_add( b, acc, shifted, false );
    }
    return acc;
  };

  /* c * x + rest, with negation as complement plus carry-in */
  auto accumulate = [&]( int coefficient, bits const& rest ) {
    auto term = product( coefficient );
    if ( coefficient < 0 )
    {
      for ( auto& bit : term )
      {
        bit = bit ? b.gate( gate_type::inv, { *bit } ) : b.constant( true );
      }
      return ripple_add( b, term, rest, true );
    }
    return ripple_add( b, term, rest, false );
  };

  auto const taps = static_cast<uint32_t>( coefficients.size() );
  bits state( ow );
  for ( uint32_t k = taps; k-- > 1; )
  {
    auto const acc = accumulate( coefficients[k], state );
    for ( uint32_t i = 0; i < ow; ++i )
    {
      state[i] = b.flop( materialize( b, acc[i] ), fmt::format( "z{}_{}", k, i ) );
    }
  }
  auto const y = accumulate( coefficients[0], state );
  for ( uint32_t i = 0; i < ow; ++i )
  {
    b.output( b.flop( materialize( b, y[i] ), fmt::format( "y{}", i ) ) );
  }
  return b.build();
}

netlist generate_bench( bench_params const& params )
{
  auto const coefficients = params.coefficients.empty() ? default_fir_coefficients( params.taps ) : params.coefficients;
  auto nl = params.kind == bench_kind::wallace ? generate_wallace( params.width, params.stages )
                                               : generate_fir( params.width, coefficients, params.stages );
  if ( params.verify )
  {
    auto p = params;
    p.coefficients = coefficients;
    if ( auto const cycle = verify_bench( nl, p, 10000u ); cycle >= 0 )
    {
      throw std::logic_error( fmt::format( "generated design disagrees with arithmetic at cycle {}", cycle ) );
    }
  }
  return nl;
}

int64_t verify_bench( netlist const& nl, bench_params const& params, uint64_t vectors, uint64_t seed )
{
  auto const w = params.width;
  auto const coefficients = params.coefficients.empty() ? default_fir_coefficients( params.taps ) : params.coefficients;
  uint32_t const operand_bits = params.kind == bench_kind::wallace ? 2 * w : w;
  std::vector<uint64_t> operands;
  if ( operand_bits <= 16 )
  {
    for ( uint64_t m = 0; m < ( uint64_t{ 1 } << operand_bits ); ++m )
    {
      operands.push_back( m );
    }
  }
  else
  {
    std::mt19937_64 rng( seed );
    for ( uint64_t i = 0; i < vectors; ++i )
    {
      operands.push_back( rng() & ( ( uint64_t{ 1 } << operand_bits ) - 1u ) );
    }
  }
  /* flush the pipeline with zeros */
  auto const flush = params.stages + static_cast<uint32_t>( coefficients.size() );
  operands.insert( operands.end(), flush, 0u );

  stimulus s;
  s.reserve( operands.size() );
  for ( auto m : operands )
  {
    std::vector<uint8_t> v( operand_bits );
    for ( uint32_t i = 0; i < operand_bits; ++i )
    {
      v[i] = static_cast<uint8_t>( ( m >> i ) & 1u );
    }
    s.push_back( std::move( v ) );
  }
  auto const trace = simulate( nl, nullptr, s );

  for ( uint64_t t = 0; t < s.size(); ++t )
  {
    int64_t expected = 0;
    uint32_t out_width = 0;
    if ( params.kind == bench_kind::wallace )
    {
      out_width = 2 * w;
      if ( t >= params.stages )
      {
        auto const m = operands[t - params.stages];
        expected = signed_value( m, w ) * signed_value( m >> w, w );
      }
    }
    else
    {
      out_width = fir_output_width( w, coefficients );
      for ( size_t k = 0; k < coefficients.size(); ++k )
      {
        auto const lag = params.stages + k;
        if ( t >= lag )
        {
          expected += coefficients[k] * signed_value( operands[t - lag], w );
        }
      }
    }
    uint64_t raw = 0;
    for ( uint32_t i = 0; i < out_width; ++i )
    {
      raw |= static_cast<uint64_t>( trace.outputs[t][i] ) << i;
    }
    if ( signed_value( raw, out_width ) != expected )
    {
      return static_cast<int64_t>( t );
    }
  }
  return -1;
}

} // namespace tlobf
