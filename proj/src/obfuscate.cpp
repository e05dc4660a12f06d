#include <tlobf/errors.hpp>
#include <tlobf/obfuscate.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace tlobf
{

namespace
{

constexpr std::array<cell_variant, 7> library{ { { 3, 1 }, { 3, 2 }, { 5, 1 }, { 5, 2 }, { 7, 1 }, { 7, 2 }, { 9, 1 } } };

key_slot to_key_slot( differential_spec const& spec, slot const& s )
{
  switch ( s.drive )
  {
  case slot_drive::tie0:
    return { "0", false, s.vt };
  case slot_drive::tie1:
    return { "1", false, s.vt };
  default:
    return { spec.inputs.at( s.input ), s.complemented, s.vt };
  }
}

uint64_t binomial( uint32_t n, uint32_t k )
{
  if ( k > n )
    return 0;
  k = std::min( k, n - k );
  unsigned __int128 r = 1;
  for ( auto i = 1u; i <= k; ++i )
  {
    r = r * ( n - k + i ) / i;
    if ( r > std::numeric_limits<uint64_t>::max() )
      throw capacity_error( "binomial coefficient exceeds 64 bits" );
  }
  return static_cast<uint64_t>( r );
}

uint64_t checked_square( uint64_t v )
{
  if ( v > 0xffffffffull )
    throw capacity_error( "obfuscation space exceeds 64 bits" );
  return v * v;
}

/* visits every k-subset of [0, n) as a boolean mask */
template<typename Fn>
void for_each_subset( uint32_t n, uint32_t k, Fn&& fn )
{
  std::vector<uint8_t> mask( n, 0 );
  std::fill( mask.end() - k, mask.end(), 1 );
  do
  {
    fn( mask );
  } while ( std::next_permutation( mask.begin(), mask.end() ) );
}

} // namespace

std::span<const cell_variant> cell_library()
{
  return library;
}

bool in_library( cell_variant const& variant )
{
  return std::find( library.begin(), library.end(), variant ) != library.end();
}

std::optional<uint32_t> max_library_decoys( uint32_t n )
{
  std::optional<uint32_t> k;
  for ( auto const& v : library )
  {
    if ( v.n == n )
      k = std::max( k.value_or( 0u ), v.k );
  }
  return k;
}

instance_key make_instance_key( differential_spec const& spec )
{
  instance_key key;
  for ( auto const& s : spec.left )
    key.left.push_back( to_key_slot( spec, s ) );
  for ( auto const& s : spec.right )
    key.right.push_back( to_key_slot( spec, s ) );
  return key;
}

differential_spec apply_key( differential_spec const& spec, instance_key const& key )
{
  auto apply_side = [&]( std::vector<slot>& side, std::vector<key_slot> const& entries, char const* name ) {
    if ( side.size() != entries.size() )
      throw contract_error( fmt::format( "key has {} {} slots, cell has {}", entries.size(), name, side.size() ) );
    for ( auto i = 0u; i < side.size(); ++i )
    {
      auto expected = to_key_slot( spec, side[i] );
      expected.vt = entries[i].vt;
      if ( expected != entries[i] )
        throw contract_error( fmt::format( "key {} slot {} does not match the cell structure", name, i ) );
      side[i].vt = entries[i].vt;
    }
  };
  auto out = spec;
  apply_side( out.left, key.left, "left" );
  apply_side( out.right, key.right, "right" );
  return out;
}

differential_spec visible_structure( differential_spec const& spec )
{
  auto out = spec;
  for ( auto& s : out.left )
    s.vt = vt_class::low;
  for ( auto& s : out.right )
    s.vt = vt_class::low;
  return out;
}

std::pair<differential_spec, instance_key> obfuscate_instance( differential_spec const& spec, cell_variant const& variant,
                                                               std::span<const std::string> pool, std::mt19937_64& rng )
{
  auto const width = std::max( { spec.cell_size, static_cast<uint32_t>( spec.left.size() ), static_cast<uint32_t>( spec.right.size() ) } );
  if ( width > variant.n )
    throw capacity_error( fmt::format( "cell needs {} slots per side, variant TLG-{} offers {}", width, variant.n, variant.n ) );
  if ( variant.k > 0u && pool.empty() )
    throw contract_error( "decoy pool is empty" );

  auto out = spec;
  out.cell_size = variant.n;
  out.reserved_decoys = variant.k;
  out.left.resize( variant.n, slot::tie1() );
  out.right.resize( variant.n, slot::tie1() );

  auto input_of = [&]( std::string const& net ) {
    auto const it = std::find( out.inputs.begin(), out.inputs.end(), net );
    if ( it != out.inputs.end() )
      return static_cast<uint32_t>( it - out.inputs.begin() );
    out.inputs.push_back( net );
    return static_cast<uint32_t>( out.inputs.size() - 1u );
  };

  for ( auto* side : { &out.left, &out.right } )
  {
    for ( auto d = 0u; d < variant.k; ++d )
    {
      auto const& net = pool[std::uniform_int_distribution<std::size_t>( 0, pool.size() - 1u )( rng )];
      auto const complemented = std::bernoulli_distribution( 0.5 )( rng );
      side->push_back( slot::signal( input_of( net ), complemented, vt_class::high ) );
    }
    if ( variant.k > 0u )
      std::shuffle( side->begin(), side->end(), rng );
  }

  auto key = make_instance_key( out );
  return { std::move( out ), std::move( key ) };
}

std::pair<differential_spec, instance_key> obfuscate_instance( differential_spec const& spec, cell_variant const& variant,
                                                               std::span<const std::string> pool, uint64_t seed )
{
  std::mt19937_64 rng( seed );
  return obfuscate_instance( spec, variant, pool, rng );
}

uint64_t obfuscation_space( uint32_t n, uint32_t k )
{
  return checked_square( binomial( n + k, k ) );
}

uint64_t obfuscation_space_total_slots( uint32_t total, uint32_t k )
{
  return checked_square( binomial( total, k ) );
}

std::set<truth_table> attacker_candidates( differential_spec const& spec, cell_variant const& variant, bool prune_ties )
{
  auto const per_side = variant.n + variant.k;
  if ( spec.left.size() != per_side || spec.right.size() != per_side )
  {
    throw contract_error( fmt::format( "cell has {}/{} slots, variant TLG-{} with {} decoys has {}", spec.left.size(), spec.right.size(),
                                       variant.n, variant.k, per_side ) );
  }
  auto const n = static_cast<uint32_t>( spec.inputs.size() );
  if ( n > truth_table::max_vars )
    throw capacity_error( fmt::format( "cell references {} inputs, at most {} supported", n, truth_table::max_vars ) );

  auto hypothesis = visible_structure( spec );
  std::set<truth_table> tables;
  std::vector<uint8_t> values( n );
  for_each_subset( per_side, variant.k, [&]( auto const& left_mask ) {
    for ( auto i = 0u; i < per_side; ++i )
      hypothesis.left[i].vt = left_mask[i] ? vt_class::high : vt_class::low;
    for_each_subset( per_side, variant.k, [&]( auto const& right_mask ) {
      for ( auto i = 0u; i < per_side; ++i )
        hypothesis.right[i].vt = right_mask[i] ? vt_class::high : vt_class::low;

      truth_table tt( n );
      for ( uint64_t index = 0; index < tt.num_bits(); ++index )
      {
        for ( auto i = 0u; i < n; ++i )
          values[i] = ( index >> i ) & 1u;
        auto const [l, r] = conducting_counts( hypothesis, values );
        if ( l == r && prune_ties )
          return;
        tt.set_bit( index, l > r );
      }
      tables.insert( std::move( tt ) );
    } );
  } );
  return tables;
}

bool ambiguity_report::meets_power_bound() const
{
  boost::multiprecision::cpp_int bound = 1;
  bound <<= ambiguous_instances;
  return product >= bound;
}

double ambiguity_report::log2_product() const
{
  double sum = 0.0;
  for ( auto const& [_, count] : candidates )
    sum += std::log2( static_cast<double>( count ) );
  return sum;
}

ambiguity_report summarize_ambiguity( std::vector<std::pair<std::string, uint64_t>> candidates )
{
  ambiguity_report report;
  report.product = 1;
  for ( auto const& [_, count] : candidates )
  {
    report.product *= count;
    if ( count >= 2u )
      ++report.ambiguous_instances;
  }
  report.candidates = std::move( candidates );
  return report;
}

std::optional<instance_key> corrupt_key( differential_spec const& visible, instance_key const& key )
{
  auto const reference = try_spec_to_truth_table( apply_key( visible, key ) );
  for ( auto side : { &instance_key::left, &instance_key::right } )
  {
    auto const& slots = key.*side;
    for ( size_t i = 0; i < slots.size(); ++i )
    {
      if ( slots[i].vt != vt_class::low || slots[i].signal == "0" || slots[i].signal == "1" )
        continue;
      for ( size_t j = 0; j < slots.size(); ++j )
      {
        if ( slots[j].vt != vt_class::high )
          continue;
        auto corrupted = key;
        std::swap( ( corrupted.*side )[i].vt, ( corrupted.*side )[j].vt );
        auto const table = try_spec_to_truth_table( apply_key( visible, corrupted ) );
        if ( !table || table != reference )
          return corrupted;
      }
    }
  }
  return std::nullopt;
}

} // namespace tlobf
