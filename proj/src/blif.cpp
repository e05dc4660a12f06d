#include <tlobf/netlist.hpp>

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include <tlobf/errors.hpp>

namespace tlobf
{

namespace
{

struct token
{
  std::string text;
  uint32_t column;
};

struct logical_line
{
  uint32_t number;
  std::vector<token> tokens;
};

/* splits into logical lines, joins `\` continuations, drops comments */
std::vector<logical_line> tokenize( std::string_view text )
{
  std::vector<logical_line> lines;
  logical_line current{ 0, {} };
  bool continued = false;
  uint32_t number = 0;
  size_t pos = 0;
  while ( pos <= text.size() )
  {
    auto end = text.find( '\n', pos );
    if ( end == std::string_view::npos )
    {
      end = text.size();
    }
    auto line = text.substr( pos, end - pos );
    pos = end + 1;
    ++number;
    if ( auto const hash = line.find( '#' ); hash != std::string_view::npos )
    {
      line = line.substr( 0, hash );
    }
    while ( !line.empty() && ( line.back() == '\r' || line.back() == ' ' || line.back() == '\t' ) )
    {
      line.remove_suffix( 1 );
    }
    bool const continues = !line.empty() && line.back() == '\\';
    if ( continues )
    {
      line.remove_suffix( 1 );
    }
    if ( !continued )
    {
      current = { number, {} };
    }
    size_t i = 0;
    while ( i < line.size() )
    {
      if ( line[i] == ' ' || line[i] == '\t' )
      {
        ++i;
        continue;
      }
      size_t j = i;
      while ( j < line.size() && line[j] != ' ' && line[j] != '\t' )
      {
        ++j;
      }
      current.tokens.push_back( { std::string( line.substr( i, j - i ) ), static_cast<uint32_t>( i + 1 ) } );
      i = j;
    }
    continued = continues;
    if ( !continued && !current.tokens.empty() )
    {
      lines.push_back( std::move( current ) );
    }
    if ( end == text.size() )
    {
      break;
    }
  }
  if ( continued && !current.tokens.empty() )
  {
    lines.push_back( std::move( current ) );
  }
  return lines;
}

class blif_parser
{
public:
  explicit blif_parser( std::string_view text ) : lines_( tokenize( text ) ) {}

  netlist run()
  {
    size_t i = 0;
    std::optional<std::string> model;
    while ( i < lines_.size() )
    {
      auto const& line = lines_[i];
      auto const& cmd = line.tokens[0].text;
      if ( cmd == ".model" )
      {
        if ( model )
        {
          fail( netlist_errc::unsupported, "more than one model", line, 0 );
        }
        model = line.tokens.size() > 1 ? line.tokens[1].text : "top";
        nl_ = netlist( *model );
        ++i;
      }
      else if ( cmd == ".inputs" )
      {
        for ( size_t t = 1; t < line.tokens.size(); ++t )
        {
          auto const n = net_at( line, t );
          claim( n, line, t );
          nl_.inputs.push_back( n );
        }
        ++i;
      }
      else if ( cmd == ".outputs" )
      {
        for ( size_t t = 1; t < line.tokens.size(); ++t )
        {
          nl_.outputs.push_back( net_at( line, t ) );
        }
        ++i;
      }
      else if ( cmd == ".names" )
      {
        i = parse_names( i );
      }
      else if ( cmd == ".latch" )
      {
        parse_latch( line );
        ++i;
      }
      else if ( cmd == ".tlg" )
      {
        i = parse_tlg( i );
      }
      else if ( cmd == ".end" )
      {
        break;
      }
      else if ( cmd == ".clock" )
      {
        ++i;
      }
      else if ( cmd[0] == '.' )
      {
        fail( netlist_errc::unsupported, fmt::format( "construct `{}` is not part of the supported subset", cmd ), line, 0 );
      }
      else
      {
        fail( netlist_errc::syntax, "cover row outside of a .names block", line, 0 );
      }
    }
    validate( nl_ );
    return std::move( nl_ );
  }

private:
  [[noreturn]] void fail( netlist_errc code, std::string const& message, logical_line const& line, size_t token ) const
  {
    auto const column = token < line.tokens.size() ? line.tokens[token].column : line.tokens.back().column;
    throw netlist_error( code, message, line.number, column );
  }

  net_id net_at( logical_line const& line, size_t token )
  {
    auto const& name = line.tokens[token].text;
    if ( name.front() == '.' || name.front() == '~' || name.back() == '*' || name.find( '=' ) != std::string::npos )
    {
      fail( netlist_errc::syntax, fmt::format( "`{}` is not a valid net name", name ), line, token );
    }
    return nl_.net( name );
  }

  void claim( net_id n, logical_line const& line, size_t token )
  {
    if ( driven_.size() <= n )
    {
      driven_.resize( n + 1, 0u );
    }
    if ( driven_[n] )
    {
      fail( netlist_errc::multiple_drivers,
            fmt::format( "net `{}` is already driven (line {})", nl_.net_name( n ), driven_[n] ), line, token );
    }
    driven_[n] = line.number;
  }

  size_t parse_names( size_t i )
  {
    auto const& head = lines_[i];
    if ( head.tokens.size() < 2 )
    {
      fail( netlist_errc::syntax, ".names needs an output net", head, 1 );
    }
    auto const num_fanins = static_cast<uint32_t>( head.tokens.size() - 2 );
    if ( num_fanins > truth_table::max_vars )
    {
      fail( netlist_errc::unsupported, fmt::format( ".names with more than {} inputs", truth_table::max_vars ), head, 0 );
    }
    gate g;
    for ( size_t t = 1; t + 1 < head.tokens.size(); ++t )
    {
      g.fanins.push_back( net_at( head, t ) );
    }
    g.output = net_at( head, head.tokens.size() - 1 );
    claim( g.output, head, head.tokens.size() - 1 );

    truth_table cover( num_fanins );
    std::optional<char> polarity;
    ++i;
    for ( ; i < lines_.size() && lines_[i].tokens[0].text[0] != '.'; ++i )
    {
      auto const& row = lines_[i];
      std::string pattern;
      size_t out_token = 0;
      if ( num_fanins > 0 )
      {
        if ( row.tokens.size() != 2 || row.tokens[0].text.size() != num_fanins )
        {
          fail( netlist_errc::syntax, fmt::format( "cover row must be a {}-character pattern and an output value", num_fanins ), row, 0 );
        }
        pattern = row.tokens[0].text;
        out_token = 1;
      }
      else if ( row.tokens.size() != 1 )
      {
        fail( netlist_errc::syntax, "constant cover row must be a single output value", row, 1 );
      }
      auto const& out = row.tokens[out_token].text;
      if ( out != "0" && out != "1" )
      {
        fail( netlist_errc::syntax, "output value must be 0 or 1", row, out_token );
      }
      if ( polarity && *polarity != out[0] )
      {
        fail( netlist_errc::syntax, "cover mixes on-set and off-set rows", row, out_token );
      }
      polarity = out[0];
      for ( uint32_t c = 0; c < num_fanins; ++c )
      {
        if ( pattern[c] != '0' && pattern[c] != '1' && pattern[c] != '-' )
        {
          throw netlist_error( netlist_errc::syntax, fmt::format( "invalid cover character `{}`", pattern[c] ), row.number,
                               row.tokens[0].column + c );
        }
      }
      for ( uint64_t m = 0; m < cover.num_bits(); ++m )
      {
        bool match = true;
        for ( uint32_t c = 0; c < num_fanins && match; ++c )
        {
          match = pattern[c] == '-' || ( pattern[c] == '1' ) == static_cast<bool>( ( m >> c ) & 1u );
        }
        if ( match )
        {
          cover.set_bit( m, true );
        }
      }
    }
    g.function = polarity == '0' ? complement( cover ) : cover;
    g.type = classify_gate( g.function );
    nl_.gates.push_back( std::move( g ) );
    return i;
  }

  void parse_latch( logical_line const& line )
  {
    auto const count = line.tokens.size() - 1;
    if ( count < 2 || count > 5 )
    {
      fail( netlist_errc::syntax, ".latch expects `input output [type control] [init]`", line, 0 );
    }
    latch l;
    l.d = net_at( line, 1 );
    l.q = net_at( line, 2 );
    claim( l.q, line, 2 );
    size_t t = 3;
    if ( count >= 4 )
    {
      static constexpr std::array<std::string_view, 5> types{ "fe", "re", "ah", "al", "as" };
      l.type = line.tokens[3].text;
      if ( std::ranges::find( types, l.type ) == types.end() )
      {
        fail( netlist_errc::syntax, fmt::format( "unknown latch type `{}`", l.type ), line, 3 );
      }
      l.clock = line.tokens[4].text;
      if ( l.clock == "NIL" )
      {
        l.clock.clear();
      }
      t = 5;
    }
    if ( t < line.tokens.size() )
    {
      auto const& init = line.tokens[t].text;
      if ( init != "0" && init != "1" && init != "2" && init != "3" )
      {
        fail( netlist_errc::syntax, "latch initial value must be 0, 1, 2 or 3", line, t );
      }
      l.init = init == "1";
    }
    nl_.latches.push_back( std::move( l ) );
  }

  std::vector<slot> parse_slots( logical_line const& line, differential_spec& spec )
  {
    std::vector<slot> slots;
    for ( size_t t = 1; t < line.tokens.size(); ++t )
    {
      auto text = line.tokens[t].text;
      auto vt = vt_class::low;
      if ( text.size() > 1 && text.back() == '*' )
      {
        vt = vt_class::high;
        text.pop_back();
      }
      if ( text == "0" )
      {
        slots.push_back( slot::tie0( vt ) );
        continue;
      }
      if ( text == "1" )
      {
        slots.push_back( slot::tie1( vt ) );
        continue;
      }
      bool const complemented = text.front() == '~';
      auto const name = complemented ? text.substr( 1 ) : text;
      if ( name.empty() || name.front() == '~' || name.front() == '.' )
      {
        fail( netlist_errc::syntax, fmt::format( "invalid slot `{}`", line.tokens[t].text ), line, t );
      }
      nl_.net( name );
      auto it = std::ranges::find( spec.inputs, name );
      if ( it == spec.inputs.end() )
      {
        spec.inputs.push_back( name );
        it = spec.inputs.end() - 1;
      }
      slots.push_back( slot::signal( static_cast<uint32_t>( it - spec.inputs.begin() ), complemented, vt ) );
    }
    return slots;
  }

  size_t parse_tlg( size_t i )
  {
    auto const& head = lines_[i];
    if ( head.tokens.size() < 4 )
    {
      fail( netlist_errc::syntax, ".tlg expects `name output cell=N [k=K] [stage=comb] [clock=C] [key=FILE]`", head, 0 );
    }
    tlg_instance inst;
    inst.name = head.tokens[1].text;
    inst.output = net_at( head, 2 );
    claim( inst.output, head, 2 );
    bool has_cell = false;
    for ( size_t t = 3; t < head.tokens.size(); ++t )
    {
      auto const& attr = head.tokens[t].text;
      auto const eq = attr.find( '=' );
      if ( eq == std::string::npos || eq == 0 || eq + 1 == attr.size() )
      {
        fail( netlist_errc::syntax, fmt::format( "expected `key=value`, got `{}`", attr ), head, t );
      }
      auto const key = attr.substr( 0, eq );
      auto const value = attr.substr( eq + 1 );
      auto number = [&]() -> uint32_t {
        try
        {
          size_t used = 0;
          auto const v = std::stoul( value, &used );
          if ( used == value.size() && v <= 64u )
          {
            return static_cast<uint32_t>( v );
          }
        }
        catch ( std::exception const& )
        {
        }
        fail( netlist_errc::syntax, fmt::format( "`{}` is not a valid number", value ), head, t );
      };
      if ( key == "cell" )
      {
        inst.variant.n = number();
        has_cell = true;
      }
      else if ( key == "k" )
      {
        inst.variant.k = number();
      }
      else if ( key == "stage" )
      {
        if ( value != "comb" && value != "seq" )
        {
          fail( netlist_errc::syntax, "stage must be `comb` or `seq`", head, t );
        }
        inst.stage = value == "comb" ? tlg_stage::combinational : tlg_stage::sequential;
      }
      else if ( key == "clock" )
      {
        inst.clock = value;
      }
      else if ( key == "key" )
      {
        nl_.key_ref = value;
      }
      else
      {
        fail( netlist_errc::syntax, fmt::format( "unknown attribute `{}`", key ), head, t );
      }
    }
    if ( !has_cell )
    {
      fail( netlist_errc::syntax, ".tlg needs a cell=N attribute", head, 0 );
    }
    inst.spec.cell_size = inst.variant.n;
    inst.spec.reserved_decoys = inst.variant.k;

    for ( auto const* side : { ".left", ".right" } )
    {
      ++i;
      if ( i >= lines_.size() || lines_[i].tokens[0].text != side )
      {
        auto const& where = i < lines_.size() ? lines_[i] : head;
        fail( netlist_errc::syntax, fmt::format( "expected `{}` after .tlg", side ), where, 0 );
      }
      auto const& line = lines_[i];
      auto slots = parse_slots( line, inst.spec );
      if ( slots.size() != inst.variant.n + inst.variant.k )
      {
        fail( netlist_errc::syntax, fmt::format( "{} has {} slots, cell={} k={} needs {}", side, slots.size(), inst.variant.n,
                                                 inst.variant.k, inst.variant.n + inst.variant.k ),
              line, 0 );
      }
      ( side[1] == 'l' ? inst.spec.left : inst.spec.right ) = std::move( slots );
    }
    nl_.tlgs.push_back( std::move( inst ) );
    return i + 1;
  }

  std::vector<logical_line> lines_;
  netlist nl_;
  std::vector<uint32_t> driven_;
};

std::string_view cover_for( gate_type type )
{
  switch ( type )
  {
  case gate_type::const1:
    return "1\n";
  case gate_type::buf:
    return "1 1\n";
  case gate_type::inv:
    return "0 1\n";
  case gate_type::and2:
    return "11 1\n";
  case gate_type::nand2:
    return "0- 1\n-0 1\n";
  case gate_type::or2:
    return "1- 1\n-1 1\n";
  case gate_type::nor2:
    return "00 1\n";
  case gate_type::xor2:
    return "01 1\n10 1\n";
  case gate_type::xnor2:
    return "00 1\n11 1\n";
  case gate_type::maj3:
    return "11- 1\n1-1 1\n-11 1\n";
  default:
    return "";
  }
}

void check_slot_name( std::string const& name )
{
  if ( name == "0" || name == "1" || name.front() == '~' || name.back() == '*' )
  {
    throw contract_error( fmt::format( "net `{}` cannot be written as a threshold cell slot", name ) );
  }
}

} // namespace

netlist parse_blif( std::string_view text )
{
  return blif_parser( text ).run();
}

std::string emit_blif( netlist const& nl )
{
  std::string out;
  auto append_names = [&]( std::vector<net_id> const& nets ) {
    for ( auto n : nets )
    {
      out += ' ';
      out += nl.net_name( n );
    }
    out += '\n';
  };
  out += fmt::format( ".model {}\n", nl.model() );
  out += ".inputs";
  append_names( nl.inputs );
  out += ".outputs";
  append_names( nl.outputs );

  for ( auto const& g : nl.gates )
  {
    out += ".names";
    append_names( [&] {
      auto nets = g.fanins;
      nets.push_back( g.output );
      return nets;
    }() );
    if ( g.type != gate_type::lut )
    {
      out += cover_for( g.type );
    }
    else if ( g.function.is_const1() )
    {
      out += std::string( g.fanins.size(), '-' ) + " 1\n";
    }
    else
    {
      for ( uint64_t m = 0; m < g.function.num_bits(); ++m )
      {
        if ( g.function.get_bit( m ) )
        {
          for ( uint32_t c = 0; c < g.fanins.size(); ++c )
          {
            out += ( ( m >> c ) & 1u ) ? '1' : '0';
          }
          out += " 1\n";
        }
      }
    }
  }

  for ( auto const& l : nl.latches )
  {
    out += fmt::format( ".latch {} {}", nl.net_name( l.d ), nl.net_name( l.q ) );
    if ( !l.type.empty() )
    {
      out += fmt::format( " {} {}", l.type, l.clock.empty() ? "NIL" : l.clock );
    }
    out += l.init ? " 1\n" : " 0\n";
  }

  for ( auto const& t : nl.tlgs )
  {
    out += fmt::format( ".tlg {} {} cell={} k={}", t.name, nl.net_name( t.output ), t.variant.n, t.variant.k );
    if ( t.stage == tlg_stage::combinational )
    {
      out += " stage=comb";
    }
    if ( !t.clock.empty() )
    {
      out += fmt::format( " clock={}", t.clock );
    }
    if ( !nl.key_ref.empty() && t.variant.k > 0 )
    {
      out += fmt::format( " key={}", nl.key_ref );
    }
    out += '\n';
    for ( auto const& [label, slots] : { std::pair{ ".left", &t.spec.left }, std::pair{ ".right", &t.spec.right } } )
    {
      out += label;
      for ( auto const& s : *slots )
      {
        out += ' ';
        if ( s.drive == slot_drive::tie0 )
        {
          out += '0';
        }
        else if ( s.drive == slot_drive::tie1 )
        {
          out += '1';
        }
        else
        {
          auto const& name = t.spec.inputs.at( s.input );
          check_slot_name( name );
          out += ( s.complemented ? "~" : "" ) + name;
        }
        if ( s.vt == vt_class::high )
        {
          out += '*';
        }
      }
      out += '\n';
    }
  }
  out += ".end\n";
  return out;
}

netlist read_blif( std::filesystem::path const& path )
{
  std::ifstream in( path );
  if ( !in )
  {
    throw std::runtime_error( fmt::format( "cannot open `{}`", path.string() ) );
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_blif( buffer.str() );
}

void write_blif( std::filesystem::path const& path, netlist const& nl )
{
  std::ofstream out( path );
  if ( !out )
  {
    throw std::runtime_error( fmt::format( "cannot write `{}`", path.string() ) );
  }
  out << emit_blif( nl );
}

} // namespace tlobf
