#include <tlobf/errors.hpp>
#include <tlobf/key_file.hpp>

#include <fstream>

#include <fmt/format.h>

namespace tlobf
{

namespace
{

constexpr char const* format_name = "tlobf-key";
constexpr int format_version = 1;

nlohmann::json side_to_json( std::vector<key_slot> const& side )
{
  auto out = nlohmann::json::array();
  for ( auto const& s : side )
  {
    out.push_back( { { "signal", s.signal },
                     { "polarity", s.complemented ? "complemented" : "true" },
                     { "vt", s.vt == vt_class::high ? "HIGH" : "LOW" } } );
  }
  return out;
}

std::vector<key_slot> side_from_json( nlohmann::json const& side, std::string const& where )
{
  if ( !side.is_array() )
    throw contract_error( fmt::format( "key: {} must be an array", where ) );
  std::vector<key_slot> out;
  for ( auto const& entry : side )
  {
    if ( !entry.is_object() || !entry.contains( "signal" ) || !entry.contains( "polarity" ) || !entry.contains( "vt" ) )
      throw contract_error( fmt::format( "key: malformed slot in {}", where ) );
    key_slot s;
    s.signal = entry.at( "signal" ).get<std::string>();
    auto const polarity = entry.at( "polarity" ).get<std::string>();
    auto const vt = entry.at( "vt" ).get<std::string>();
    if ( polarity != "true" && polarity != "complemented" )
      throw contract_error( fmt::format( "key: bad polarity '{}' in {}", polarity, where ) );
    if ( vt != "LOW" && vt != "HIGH" )
      throw contract_error( fmt::format( "key: bad vt '{}' in {}", vt, where ) );
    s.complemented = polarity == "complemented";
    s.vt = vt == "HIGH" ? vt_class::high : vt_class::low;
    out.push_back( std::move( s ) );
  }
  return out;
}

} // namespace

nlohmann::json key_to_json( obfuscation_key const& key )
{
  nlohmann::json doc;
  doc["format"] = format_name;
  doc["version"] = format_version;
  doc["seed"] = key.seed;
  doc["instances"] = nlohmann::json::object();
  for ( auto const& [name, entry] : key.instances )
  {
    doc["instances"][name] = { { "left", side_to_json( entry.left ) }, { "right", side_to_json( entry.right ) } };
  }
  return doc;
}

obfuscation_key key_from_json( nlohmann::json const& doc )
{
  try
  {
    if ( doc.at( "format" ).get<std::string>() != format_name )
      throw contract_error( "key: unknown format" );
    if ( doc.at( "version" ).get<int>() != format_version )
      throw contract_error( "key: unsupported version" );

    obfuscation_key key;
    key.seed = doc.at( "seed" ).get<uint64_t>();
    for ( auto const& [name, entry] : doc.at( "instances" ).items() )
    {
      key.instances[name] = instance_key{ side_from_json( entry.at( "left" ), name + ".left" ), side_from_json( entry.at( "right" ), name + ".right" ) };
    }
    return key;
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw contract_error( fmt::format( "key: {}", e.what() ) );
  }
}

void write_key_file( std::filesystem::path const& path, obfuscation_key const& key )
{
  std::ofstream os( path );
  if ( !os )
    throw std::runtime_error( fmt::format( "cannot write {}", path.string() ) );
  os << key_to_json( key ).dump( 2 ) << '\n';
}

obfuscation_key read_key_file( std::filesystem::path const& path )
{
  std::ifstream is( path );
  if ( !is )
    throw std::runtime_error( fmt::format( "cannot read {}", path.string() ) );
  nlohmann::json doc;
  try
  {
    is >> doc;
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw contract_error( fmt::format( "key: {}", e.what() ) );
  }
  return key_from_json( doc );
}

} // namespace tlobf
