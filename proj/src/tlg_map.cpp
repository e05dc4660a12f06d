#include <tlobf/errors.hpp>
#include <tlobf/tlg_map.hpp>

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace tlobf
{

std::vector<std::string> default_input_names( uint32_t num_vars )
{
  std::vector<std::string> names;
  for ( auto i = 0u; i < num_vars; ++i )
  {
    names.push_back( num_vars <= 26u ? std::string( 1, static_cast<char>( 'a' + i ) ) : fmt::format( "x{}", i + 1 ) );
  }
  return names;
}

threshold_function double_and_oddify( threshold_function const& tf )
{
  threshold_function out;
  for ( auto w : tf.weights )
  {
    if ( w < 0 )
      throw contract_error( fmt::format( "negative weight in {}, normalize first", to_string( tf ) ) );
    out.weights.push_back( 2 * w );
  }
  if ( tf.threshold < 1 )
    throw contract_error( fmt::format( "threshold of {} must be at least 1", to_string( tf ) ) );
  out.threshold = 2 * tf.threshold - 1;
  return out;
}

differential_spec naive_assignment( threshold_function const& tf, std::vector<std::string> inputs, std::span<const uint32_t> negated )
{
  if ( inputs.size() != tf.weights.size() )
    throw contract_error( "input names do not match the weight count" );

  differential_spec spec;
  spec.inputs = std::move( inputs );
  for ( auto i = 0u; i < tf.num_vars(); ++i )
  {
    auto const is_negated = std::find( negated.begin(), negated.end(), i ) != negated.end();
    for ( auto c = 0; c < tf.weights[i]; ++c )
      spec.left.push_back( slot::signal( i, !is_negated ) );
  }
  for ( auto c = 0; c < tf.threshold; ++c )
    spec.right.push_back( slot::tie0() );
  return spec;
}

differential_spec balance( differential_spec const& spec )
{
  auto const n = static_cast<uint32_t>( spec.inputs.size() );
  std::vector<int> copies( n, 0 );
  std::vector<uint8_t> polarity( n, 1 );
  for ( auto const& s : spec.left )
  {
    if ( s.drive != slot_drive::signal )
      throw contract_error( "balance expects only signal slots on the left" );
    ++copies[s.input];
    polarity[s.input] = s.complemented;
  }
  auto tie0s = static_cast<int>( std::count_if( spec.right.begin(), spec.right.end(), []( auto const& s ) { return s.drive == slot_drive::tie0; } ) );
  if ( tie0s != static_cast<int>( spec.right.size() ) )
    throw contract_error( "balance expects only tie-0 slots on the right" );

  std::vector<uint32_t> order( n );
  std::iota( order.begin(), order.end(), 0u );
  std::stable_sort( order.begin(), order.end(), [&]( auto a, auto b ) { return copies[a] > copies[b]; } );

  std::vector<int> moved( n, 0 );
  for ( auto v : order )
  {
    auto const m = std::min( copies[v] / 2, tie0s );
    moved[v] += m;
    tie0s -= m;
  }
  for ( auto it = order.rbegin(); it != order.rend(); ++it )
  {
    auto const m = std::min( copies[*it] - moved[*it], tie0s );
    moved[*it] += m;
    tie0s -= m;
  }

  differential_spec out;
  out.inputs = spec.inputs;
  out.cell_size = spec.cell_size;
  out.reserved_decoys = spec.reserved_decoys;
  for ( auto v = 0u; v < n; ++v )
  {
    for ( auto c = moved[v]; c < copies[v]; ++c )
      out.left.push_back( slot::signal( v, polarity[v] ) );
  }
  for ( auto v = 0u; v < n; ++v )
  {
    for ( auto c = 0; c < moved[v]; ++c )
      out.right.push_back( slot::signal( v, !polarity[v] ) );
  }
  for ( auto c = 0; c < tie0s; ++c )
    out.right.push_back( slot::tie0() );
  return out;
}

differential_spec fit_to_library( differential_spec const& spec, std::span<const uint32_t> cell_sizes, uint32_t decoys )
{
  auto const needed = static_cast<uint32_t>( std::max( spec.left.size(), spec.right.size() ) );
  std::optional<uint32_t> size;
  for ( auto s : cell_sizes )
  {
    if ( s >= needed && ( !size || s < *size ) )
      size = s;
  }
  if ( !size )
    throw capacity_error( fmt::format( "function needs a TLG-{} cell, library offers at most TLG-{}", needed,
                                       cell_sizes.empty() ? 0u : *std::max_element( cell_sizes.begin(), cell_sizes.end() ) ) );

  auto out = spec;
  out.cell_size = *size;
  out.reserved_decoys = decoys;
  out.left.resize( *size, slot::tie1() );
  out.right.resize( *size, slot::tie1() );
  return out;
}

differential_spec fit_to_library( differential_spec const& spec, uint32_t decoys )
{
  return fit_to_library( spec, default_cell_sizes, decoys );
}

std::pair<int, int> conducting_counts( differential_spec const& spec, std::span<const uint8_t> values )
{
  if ( values.size() != spec.inputs.size() )
    throw contract_error( fmt::format( "cell has {} inputs, got {} values", spec.inputs.size(), values.size() ) );
  auto count = [&]( std::vector<slot> const& side ) {
    return static_cast<int>( std::count_if( side.begin(), side.end(), [&]( auto const& s ) { return s.vt == vt_class::low && s.conducts( values ); } ) );
  };
  return { count( spec.left ), count( spec.right ) };
}

bool eval_diff( differential_spec const& spec, std::span<const uint8_t> values )
{
  auto const [l, r] = conducting_counts( spec, values );
  if ( l == r )
    throw tie_violation( fmt::format( "tie: {} conducting slots on both sides at input {}", l, encode_assignment( values ) ), encode_assignment( values ) );
  return l > r;
}

namespace
{

differential_spec with_override( differential_spec const& spec, std::optional<vt_override> const& vt )
{
  if ( !vt )
    return spec;
  if ( vt->left.size() != spec.left.size() || vt->right.size() != spec.right.size() )
    throw contract_error( "Vt override does not match the slot counts" );
  auto out = spec;
  for ( auto i = 0u; i < out.left.size(); ++i )
    out.left[i].vt = vt->left[i];
  for ( auto i = 0u; i < out.right.size(); ++i )
    out.right[i].vt = vt->right[i];
  return out;
}

} // namespace

truth_table spec_to_truth_table( differential_spec const& spec, std::optional<vt_override> const& vt )
{
  auto const effective = with_override( spec, vt );
  auto const n = static_cast<uint32_t>( spec.inputs.size() );
  if ( n > truth_table::max_vars )
    throw capacity_error( fmt::format( "cell references {} distinct inputs, at most {} supported", n, truth_table::max_vars ) );
  std::vector<uint8_t> values( n );
  return tabulate( n, [&]( uint64_t index ) {
    for ( auto i = 0u; i < n; ++i )
      values[i] = ( index >> i ) & 1u;
    return eval_diff( effective, values );
  } );
}

std::optional<truth_table> try_spec_to_truth_table( differential_spec const& spec, std::optional<vt_override> const& vt )
{
  try
  {
    return spec_to_truth_table( spec, vt );
  }
  catch ( tie_violation const& )
  {
    return std::nullopt;
  }
}

std::string to_notation( differential_spec const& spec, bool mark_vt )
{
  auto side = [&]( std::vector<slot> const& slots ) {
    std::vector<std::string> items;
    for ( auto const& s : slots )
    {
      std::string item;
      switch ( s.drive )
      {
      case slot_drive::tie0:
        item = "0";
        break;
      case slot_drive::tie1:
        item = "1";
        break;
      default:
        item = ( s.complemented ? "~" : "" ) + spec.inputs[s.input];
      }
      if ( mark_vt && s.vt == vt_class::high )
        item += "*";
      items.push_back( std::move( item ) );
    }
    return fmt::format( "{}", fmt::join( items, "," ) );
  };
  return fmt::format( "L: {} | R: {}", side( spec.left ), side( spec.right ) );
}

differential_spec map_threshold_function( threshold_function const& tf, std::vector<std::string> inputs, uint32_t decoys,
                                          std::span<const uint32_t> cell_sizes )
{
  auto const positive = normalize_positive( tf );
  auto const doubled = double_and_oddify( positive.function );
  auto const naive = naive_assignment( doubled, std::move( inputs ), positive.complemented );
  return fit_to_library( balance( naive ), cell_sizes, decoys );
}

xor3_macro make_xor3_macro( std::vector<std::string> inputs, std::string internal, bool inverted )
{
  if ( inputs.size() != 3u )
    throw contract_error( "XOR3 macro takes exactly three inputs" );

  xor3_macro macro;
  macro.first = map_threshold_function( threshold_function{ { 1, 1, 1 }, 2 }, inputs );
  inputs.push_back( std::move( internal ) );
  auto const second = inverted ? threshold_function{ { -1, -1, -1, 2 }, 0 } : threshold_function{ { 1, 1, 1, -2 }, 1 };
  macro.second = map_threshold_function( second, std::move( inputs ) );
  return macro;
}

std::vector<std::string> macro_inputs( xor3_macro const& macro )
{
  auto names = macro.first.inputs;
  auto const& internal = macro.second.inputs.at( 3 );
  for ( auto const& name : macro.second.inputs )
  {
    if ( name != internal && std::find( names.begin(), names.end(), name ) == names.end() )
      names.push_back( name );
  }
  return names;
}

bool eval_xor3_macro( xor3_macro const& macro, std::span<const uint8_t> values )
{
  auto const names = macro_inputs( macro );
  if ( values.size() != names.size() )
    throw contract_error( fmt::format( "macro has {} inputs, got {} values", names.size(), values.size() ) );

  auto value_of = [&]( std::string const& name ) {
    return values[std::find( names.begin(), names.end(), name ) - names.begin()];
  };
  std::vector<uint8_t> first( macro.first.inputs.size() );
  for ( auto i = 0u; i < first.size(); ++i )
    first[i] = value_of( macro.first.inputs[i] );
  auto const g = static_cast<uint8_t>( eval_diff( macro.first, first ) );

  auto const& internal = macro.second.inputs[3];
  std::vector<uint8_t> second( macro.second.inputs.size() );
  for ( auto i = 0u; i < second.size(); ++i )
    second[i] = macro.second.inputs[i] == internal ? g : value_of( macro.second.inputs[i] );
  return eval_diff( macro.second, second );
}

truth_table xor3_macro_truth_table( xor3_macro const& macro )
{
  auto const n = static_cast<uint32_t>( macro_inputs( macro ).size() );
  return tabulate( n, [&]( uint64_t index ) {
    auto const values = decode_assignment( index, n );
    return eval_xor3_macro( macro, values );
  } );
}

} // namespace tlobf
