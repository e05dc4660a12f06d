#include <tlobf/errors.hpp>
#include <tlobf/threshold.hpp>

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace tlobf
{

std::string to_string( threshold_function const& tf )
{
  return fmt::format( "[{};{}]", fmt::join( tf.weights, "," ), tf.threshold );
}

threshold_function parse_threshold_function( std::string_view text )
{
  auto fail = [&]() -> threshold_function {
    throw contract_error( fmt::format( "malformed threshold function '{}'", text ) );
  };

  if ( text.size() < 3 || text.front() != '[' || text.back() != ']' )
    return fail();
  auto body = text.substr( 1, text.size() - 2 );
  auto const semi = body.find( ';' );
  if ( semi == std::string_view::npos )
    return fail();

  auto parse_int = [&]( std::string_view s ) {
    int value{};
    auto const [ptr, ec] = std::from_chars( s.data(), s.data() + s.size(), value );
    if ( ec != std::errc{} || ptr != s.data() + s.size() )
      fail();
    return value;
  };

  threshold_function tf;
  auto weights = body.substr( 0, semi );
  while ( !weights.empty() )
  {
    auto const comma = weights.find( ',' );
    tf.weights.push_back( parse_int( weights.substr( 0, comma ) ) );
    if ( comma == std::string_view::npos )
      break;
    weights.remove_prefix( comma + 1 );
  }
  tf.threshold = parse_int( body.substr( semi + 1 ) );
  return tf;
}

bool eval_threshold( threshold_function const& tf, std::span<const uint8_t> assignment )
{
  if ( assignment.size() != tf.weights.size() )
  {
    throw contract_error( fmt::format( "assignment has {} values, function has {} weights", assignment.size(), tf.weights.size() ) );
  }
  long sum = 0;
  for ( auto i = 0u; i < assignment.size(); ++i )
  {
    if ( assignment[i] )
      sum += tf.weights[i];
  }
  return sum >= tf.threshold;
}

truth_table to_truth_table( threshold_function const& tf )
{
  return tabulate( tf.num_vars(), [&]( uint64_t index ) {
    long sum = 0;
    for ( auto i = 0u; i < tf.num_vars(); ++i )
    {
      if ( ( index >> i ) & 1u )
        sum += tf.weights[i];
    }
    return sum >= tf.threshold;
  } );
}

int default_weight_bound( uint32_t num_vars )
{
  return num_vars <= 5u ? 8 : 16;
}

namespace
{

constexpr uint32_t max_identify_vars = 10u;

void check_identify_args( truth_table const& tt, int weight_bound )
{
  if ( tt.num_vars() > max_identify_vars )
  {
    throw capacity_error( fmt::format( "identification supports at most {} variables, got {}", max_identify_vars, tt.num_vars() ) );
  }
  if ( weight_bound < 1 )
    throw contract_error( "weight bound must be at least 1" );
}

/* Realization with zero weights; only constants have one. */
std::optional<threshold_function> constant_form( truth_table const& tt )
{
  if ( tt.is_const0() )
    return threshold_function{ std::vector<int>( tt.num_vars(), 0 ), 1 };
  if ( tt.is_const1() )
    return threshold_function{ std::vector<int>( tt.num_vars(), 0 ), 0 };
  return std::nullopt;
}

/* +1 positive unate and essential, -1 negative unate and essential, 0 vacuous.
   Empty result means some variable is binate. */
std::optional<std::vector<int>> sign_pattern( truth_table const& tt )
{
  std::vector<int> signs( tt.num_vars(), 0 );
  for ( auto v = 0u; v < tt.num_vars(); ++v )
  {
    if ( !has_var( tt, v ) )
      continue;
    if ( is_positive_unate( tt, v ) )
      signs[v] = 1;
    else if ( is_negative_unate( tt, v ) )
      signs[v] = -1;
    else
      return std::nullopt;
  }
  return signs;
}

/* Smallest feasible threshold for fixed weights, if any. */
std::optional<int> threshold_for( truth_table const& tt, std::span<const int> weights )
{
  long max_off = std::numeric_limits<long>::min();
  long min_on = std::numeric_limits<long>::max();
  for ( uint64_t index = 0; index < tt.num_bits(); ++index )
  {
    long sum = 0;
    for ( auto i = 0u; i < weights.size(); ++i )
    {
      if ( ( index >> i ) & 1u )
        sum += weights[i];
    }
    if ( tt.get_bit( index ) )
      min_on = std::min( min_on, sum );
    else
      max_off = std::max( max_off, sum );
    if ( max_off >= min_on )
      return std::nullopt;
  }
  return static_cast<int>( max_off + 1 );
}

} // namespace

namespace detail
{

std::optional<threshold_function> identify_exhaustive( truth_table const& tt, int weight_bound )
{
  check_identify_args( tt, weight_bound );
  if ( auto c = constant_form( tt ) )
    return c;

  auto const signs = sign_pattern( tt );
  if ( !signs )
    return std::nullopt;

  auto const n = tt.num_vars();
  auto const essential = static_cast<int>( std::count_if( signs->begin(), signs->end(), []( int s ) { return s != 0; } ) );

  std::vector<int> weights( n, 0 );
  std::optional<threshold_function> found;

  /* enumerates weight vectors with sum |w| == budget in ascending lexicographic order */
  auto rec = [&]( auto&& self, uint32_t pos, int budget, int essentials_left ) -> bool {
    if ( pos == n )
    {
      if ( budget != 0 )
        return false;
      if ( auto t = threshold_for( tt, weights ) )
      {
        found = threshold_function{ weights, *t };
        return true;
      }
      return false;
    }
    auto const sign = ( *signs )[pos];
    if ( sign == 0 )
    {
      weights[pos] = 0;
      return self( self, pos + 1, budget, essentials_left );
    }
    auto const rest = essentials_left - 1;
    auto const hi = std::min( weight_bound, budget - rest );
    auto const lo = std::max( 1, budget - rest * weight_bound );
    if ( sign > 0 )
    {
      for ( auto m = lo; m <= hi; ++m )
      {
        weights[pos] = m;
        if ( self( self, pos + 1, budget - m, rest ) )
          return true;
      }
    }
    else
    {
      for ( auto m = hi; m >= lo; --m )
      {
        weights[pos] = -m;
        if ( self( self, pos + 1, budget - m, rest ) )
          return true;
      }
    }
    return false;
  };

  for ( auto budget = essential; budget <= essential * weight_bound; ++budget )
  {
    if ( rec( rec, 0u, budget, essential ) )
      return found;
  }
  return std::nullopt;
}

std::optional<threshold_function> identify_branch_and_bound( truth_table const& tt, int weight_bound )
{
  check_identify_args( tt, weight_bound );
  if ( auto c = constant_form( tt ) )
    return c;

  auto const signs = sign_pattern( tt );
  if ( !signs )
    return std::nullopt;

  /* positive function over the essential variables */
  std::vector<uint32_t> vars;
  for ( auto v = 0u; v < tt.num_vars(); ++v )
  {
    if ( ( *signs )[v] != 0 )
      vars.push_back( v );
  }
  auto const m = static_cast<uint32_t>( vars.size() );
  auto const pos = tabulate( m, [&]( uint64_t index ) {
    uint64_t full = 0;
    for ( auto i = 0u; i < m; ++i )
    {
      bool bit = ( index >> i ) & 1u;
      if ( ( *signs )[vars[i]] < 0 )
        bit = !bit;
      if ( bit )
        full |= uint64_t( 1 ) << vars[i];
    }
    return tt.get_bit( full );
  } );

  /* Chow parameters order the search; dominance must be a total preorder
     consistent with that order, otherwise the function is not threshold */
  std::vector<uint64_t> chow( m, 0 );
  for ( uint64_t index = 0; index < pos.num_bits(); ++index )
  {
    if ( !pos.get_bit( index ) )
      continue;
    for ( auto i = 0u; i < m; ++i )
      chow[i] += ( index >> i ) & 1u;
  }
  std::vector<uint32_t> order( m );
  std::iota( order.begin(), order.end(), 0u );
  std::stable_sort( order.begin(), order.end(), [&]( auto a, auto b ) { return chow[a] > chow[b]; } );

  auto dominates = [&]( uint32_t i, uint32_t j ) {
    for ( uint64_t index = 0; index < pos.num_bits(); ++index )
    {
      if ( ( ( index >> i ) & 1u ) == 1u && ( ( index >> j ) & 1u ) == 0u )
      {
        auto const swapped = index ^ ( uint64_t( 1 ) << i ) ^ ( uint64_t( 1 ) << j );
        if ( pos.get_bit( swapped ) && !pos.get_bit( index ) )
          return false;
      }
    }
    return true;
  };
  /* strict[k]: weight at order position k must exceed the one at k+1 */
  std::vector<uint8_t> strict( m, 0 );
  for ( auto k = 0u; k + 1 < m; ++k )
  {
    if ( !dominates( order[k], order[k + 1] ) )
      return std::nullopt;
    strict[k] = !dominates( order[k + 1], order[k] );
  }

  /* minimal true points and maximal false points, in search positions */
  std::vector<uint64_t> min_true, max_false;
  for ( uint64_t index = 0; index < pos.num_bits(); ++index )
  {
    bool extremal = true;
    for ( auto i = 0u; i < m && extremal; ++i )
    {
      auto const bit = uint64_t( 1 ) << i;
      if ( pos.get_bit( index ) && ( index & bit ) && pos.get_bit( index ^ bit ) )
        extremal = false;
      if ( !pos.get_bit( index ) && !( index & bit ) && !pos.get_bit( index | bit ) )
        extremal = false;
    }
    if ( !extremal )
      continue;
    uint64_t permuted = 0;
    for ( auto k = 0u; k < m; ++k )
    {
      if ( ( index >> order[k] ) & 1u )
        permuted |= uint64_t( 1 ) << k;
    }
    ( pos.get_bit( index ) ? min_true : max_false ).push_back( permuted );
  }

  /* each separating constraint: sum over `plus` minus sum over `minus` >= 1 */
  struct constraint
  {
    uint64_t plus, minus;
  };
  std::vector<constraint> constraints;
  for ( auto p : min_true )
  {
    for ( auto q : max_false )
      constraints.push_back( { p & ~q, q & ~p } );
  }
  std::sort( constraints.begin(), constraints.end(), []( auto const& a, auto const& b ) {
    return std::tie( a.plus, a.minus ) < std::tie( b.plus, b.minus );
  } );
  constraints.erase( std::unique( constraints.begin(), constraints.end(), []( auto const& a, auto const& b ) {
                       return a.plus == b.plus && a.minus == b.minus;
                     } ),
                     constraints.end() );
  for ( auto const& c : constraints )
  {
    if ( c.plus == 0u )
      return std::nullopt;
  }

  std::vector<int> w( m, 0 );
  std::vector<std::vector<int>> solutions;

  /* optimistic bound with positions >= k unassigned, each at most `cap` and at least 1 */
  auto feasible_prefix = [&]( uint32_t k, int cap ) {
    auto const assigned = k >= 64u ? ~uint64_t( 0 ) : ( uint64_t( 1 ) << k ) - 1u;
    for ( auto const& c : constraints )
    {
      long value = 0;
      for ( auto i = 0u; i < m; ++i )
      {
        auto const bit = uint64_t( 1 ) << i;
        if ( assigned & bit )
        {
          if ( c.plus & bit )
            value += w[i];
          else if ( c.minus & bit )
            value -= w[i];
        }
        else
        {
          if ( c.plus & bit )
            value += cap;
          else if ( c.minus & bit )
            value -= 1;
        }
      }
      if ( value < 1 )
        return false;
    }
    return true;
  };

  auto rec = [&]( auto&& self, uint32_t k, int budget ) -> void {
    if ( k == m )
    {
      if ( budget == 0 && feasible_prefix( m, 0 ) )
        solutions.push_back( w );
      return;
    }
    auto const rest = static_cast<int>( m - k - 1 );
    auto hi = std::min( weight_bound, budget - rest );
    if ( k > 0 )
      hi = std::min( hi, w[k - 1] - ( strict[k - 1] ? 1 : 0 ) );
    /* the remaining weights never exceed this one */
    auto const lo = std::max( 1, ( budget + rest ) / ( rest + 1 ) );
    for ( auto value = hi; value >= lo; --value )
    {
      w[k] = value;
      if ( feasible_prefix( k + 1, value ) )
        self( self, k + 1, budget - value );
    }
  };

  for ( auto budget = static_cast<int>( m ); budget <= static_cast<int>( m ) * weight_bound; ++budget )
  {
    rec( rec, 0u, budget );
    if ( solutions.empty() )
      continue;

    /* the search fixes one order inside each class of symmetric variables;
       every permutation inside a class is a realization of the same sum */
    std::vector<std::pair<uint32_t, uint32_t>> classes;
    for ( auto k = 0u; k < m; )
    {
      auto end = k + 1;
      while ( end < m && !strict[end - 1] )
        ++end;
      classes.emplace_back( k, end );
      k = end;
    }
    std::vector<std::vector<int>> expanded;
    for ( auto s : solutions )
    {
      auto expand = [&]( auto&& self, std::size_t c ) -> void {
        if ( c == classes.size() )
        {
          expanded.push_back( s );
          return;
        }
        auto const first = s.begin() + classes[c].first;
        auto const last = s.begin() + classes[c].second;
        std::sort( first, last );
        do
        {
          self( self, c + 1 );
        } while ( std::next_permutation( first, last ) );
      };
      expand( expand, 0u );
    }

    std::optional<threshold_function> best;
    for ( auto const& s : expanded )
    {
      std::vector<int> weights( tt.num_vars(), 0 );
      for ( auto k = 0u; k < m; ++k )
      {
        auto const v = vars[order[k]];
        weights[v] = ( *signs )[v] * s[k];
      }
      auto const t = threshold_for( tt, weights );
      if ( !t )
        continue;
      threshold_function candidate{ std::move( weights ), *t };
      if ( !best || std::tie( candidate.weights, candidate.threshold ) < std::tie( best->weights, best->threshold ) )
        best = std::move( candidate );
    }
    return best;
  }
  return std::nullopt;
}

} // namespace detail

std::optional<threshold_function> identify( truth_table const& tt, int weight_bound )
{
  if ( tt.num_vars() <= 4u )
    return detail::identify_exhaustive( tt, weight_bound );
  return detail::identify_branch_and_bound( tt, weight_bound );
}

std::optional<threshold_function> identify( truth_table const& tt )
{
  return identify( tt, default_weight_bound( tt.num_vars() ) );
}

positive_form normalize_positive( threshold_function const& tf )
{
  positive_form result{ tf, {} };
  for ( auto i = 0u; i < tf.num_vars(); ++i )
  {
    auto& w = result.function.weights[i];
    if ( w < 0 )
    {
      result.function.threshold -= w;
      w = -w;
      result.complemented.push_back( i );
    }
  }
  return result;
}

uint64_t count_threshold_functions( uint32_t num_vars )
{
  if ( num_vars > 4u )
    throw capacity_error( fmt::format( "threshold function counting supports at most 4 variables, got {}", num_vars ) );

  uint64_t const tables = uint64_t( 1 ) << ( uint64_t( 1 ) << num_vars );
  uint64_t count = 0;
  for ( uint64_t bits = 0; bits < tables; ++bits )
  {
    auto const tt = tabulate( num_vars, [bits]( uint64_t i ) { return ( bits >> i ) & 1u; } );
    if ( identify( tt, 8 ) )
      ++count;
  }
  return count;
}

} // namespace tlobf
