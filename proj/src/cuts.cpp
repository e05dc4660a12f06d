#include <tlobf/cuts.hpp>

#include <algorithm>
#include <map>

#include <tlobf/errors.hpp>

namespace tlobf
{

namespace
{

using leaf_set = std::vector<net_id>;

bool is_subset( leaf_set const& a, leaf_set const& b )
{
  return std::ranges::includes( b, a );
}

void insert_irredundant( std::vector<leaf_set>& sets, leaf_set candidate )
{
  for ( auto const& s : sets )
  {
    if ( is_subset( s, candidate ) )
    {
      return;
    }
  }
  std::erase_if( sets, [&]( leaf_set const& s ) { return is_subset( candidate, s ); } );
  sets.push_back( std::move( candidate ) );
}

class cut_enumerator
{
public:
  cut_enumerator( netlist const& nl, uint32_t max_leaves, uint32_t limit )
      : nl_( nl ), drivers_( compute_drivers( nl ) ), max_leaves_( max_leaves ), limit_( limit )
  {
  }

  std::vector<leaf_set> const& cuts_of( net_id n )
  {
    if ( auto const it = memo_.find( n ); it != memo_.end() )
    {
      return it->second;
    }
    /* iterative post-order to keep deep cones off the call stack */
    std::vector<std::pair<net_id, bool>> stack{ { n, false } };
    while ( !stack.empty() )
    {
      auto const [net, expanded] = stack.back();
      stack.pop_back();
      if ( memo_.contains( net ) )
      {
        continue;
      }
      auto const& d = drivers_.at( net );
      if ( d.what != driver::kind::gate )
      {
        memo_[net] = { { net } };
        continue;
      }
      auto const& g = nl_.gates[d.index];
      if ( !expanded )
      {
        stack.push_back( { net, true } );
        for ( auto f : g.fanins )
        {
          if ( !memo_.contains( f ) )
          {
            stack.push_back( { f, false } );
          }
        }
        continue;
      }
      memo_[net] = merge( net, g );
    }
    return memo_.at( n );
  }

private:
  std::vector<leaf_set> merge( net_id net, gate const& g )
  {
    std::vector<leaf_set> partial{ {} };
    for ( auto f : g.fanins )
    {
      std::vector<leaf_set> next;
      for ( auto const& p : partial )
      {
        for ( auto const& c : memo_.at( f ) )
        {
          leaf_set u;
          std::ranges::set_union( p, c, std::back_inserter( u ) );
          if ( u.size() <= max_leaves_ )
          {
            insert_irredundant( next, std::move( u ) );
          }
        }
      }
      partial = std::move( next );
    }
    if ( limit_ && partial.size() > limit_ )
    {
      std::ranges::sort( partial, []( auto const& a, auto const& b ) { return a.size() != b.size() ? a.size() < b.size() : a < b; } );
      partial.resize( limit_ );
    }
    insert_irredundant( partial, { net } );
    return partial;
  }

  netlist const& nl_;
  std::vector<driver> drivers_;
  uint32_t max_leaves_;
  uint32_t limit_;
  std::map<net_id, std::vector<leaf_set>> memo_;
};

} // namespace

std::vector<uint32_t> cone_gates( netlist const& nl, net_id root, std::vector<net_id> const& leaves )
{
  auto const drivers = compute_drivers( nl );
  std::vector<uint32_t> order;
  std::vector<uint8_t> seen( nl.num_nets(), 0u );
  for ( auto l : leaves )
  {
    seen[l] = 1u;
  }
  std::vector<std::pair<net_id, bool>> stack{ { root, false } };
  while ( !stack.empty() )
  {
    auto const [n, expanded] = stack.back();
    stack.pop_back();
    auto const& d = drivers[n];
    if ( expanded )
    {
      order.push_back( d.index );
      continue;
    }
    if ( seen[n] )
    {
      continue;
    }
    seen[n] = 1u;
    if ( d.what != driver::kind::gate )
    {
      throw contract_error( "leaves do not form a cut of the root" );
    }
    stack.push_back( { n, true } );
    for ( auto f : nl.gates[d.index].fanins )
    {
      stack.push_back( { f, false } );
    }
  }
  return order;
}

std::vector<cut> enumerate_cuts( netlist const& nl, net_id root, uint32_t max_leaves, uint32_t limit )
{
  if ( max_leaves == 0 )
  {
    throw contract_error( "cuts need at least one leaf" );
  }
  cut_enumerator enumerator( nl, max_leaves, limit );
  std::vector<cut> result;
  for ( auto const& leaves : enumerator.cuts_of( root ) )
  {
    result.push_back( { root, leaves, cone_gates( nl, root, leaves ) } );
  }
  std::ranges::sort( result, []( cut const& a, cut const& b ) {
    if ( a.cone.size() != b.cone.size() )
    {
      return a.cone.size() > b.cone.size();
    }
    if ( a.leaves.size() != b.leaves.size() )
    {
      return a.leaves.size() < b.leaves.size();
    }
    return a.leaves < b.leaves;
  } );
  return result;
}

truth_table cone_function( netlist const& nl, cut const& c )
{
  auto const num_vars = static_cast<uint32_t>( c.leaves.size() );
  if ( num_vars > truth_table::max_vars )
  {
    throw capacity_error( "cut has too many leaves for a truth table" );
  }
  std::map<net_id, truth_table> value;
  for ( uint32_t i = 0; i < num_vars; ++i )
  {
    value.emplace( c.leaves[i], make_var( num_vars, i ) );
  }
  for ( auto gi : c.cone )
  {
    auto const& g = nl.gates[gi];
    std::vector<truth_table const*> ins;
    for ( auto f : g.fanins )
    {
      ins.push_back( &value.at( f ) );
    }
    value.insert_or_assign( g.output, tabulate( num_vars, [&]( uint64_t m ) {
                              uint64_t index = 0;
                              for ( size_t j = 0; j < ins.size(); ++j )
                              {
                                index |= static_cast<uint64_t>( ins[j]->get_bit( m ) ) << j;
                              }
                              return g.function.get_bit( index );
                            } ) );
  }
  return value.at( c.root );
}

} // namespace tlobf
