/*! \file tlobf.cpp
  \brief Command-line front end of the threshold logic obfuscation flow.
*/

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <tlobf/bench.hpp>
#include <tlobf/errors.hpp>
#include <tlobf/hybridize.hpp>
#include <tlobf/key_file.hpp>
#include <tlobf/netlist.hpp>
#include <tlobf/obfuscate.hpp>
#include <tlobf/race_model.hpp>
#include <tlobf/simulate.hpp>
#include <tlobf/threshold.hpp>
#include <tlobf/tlg_map.hpp>

using namespace tlobf;
using json = nlohmann::ordered_json;

namespace
{

constexpr uint64_t default_seed = 1u;

enum exit_code : int
{
  exit_ok = 0,
  exit_error = 1,
  exit_negative = 2,
  exit_counterexample = 3
};

struct global_options
{
  bool json = false;
  std::string seed = std::to_string( default_seed );
  uint32_t threads = 1;
};

/*! \brief Collects text lines and a JSON record, prints one of them. */
class output
{
public:
  output( std::string command, bool as_json ) : as_json_( as_json ) { doc_["command"] = std::move( command ); }

  template<typename... Args>
  void line( fmt::format_string<Args...> format, Args&&... args )
  {
    text_ += fmt::format( format, std::forward<Args>( args )... );
    text_ += '\n';
  }

  json& operator[]( char const* key ) { return doc_[key]; }

  int finish( int code )
  {
    if ( as_json_ )
    {
      doc_["exit_code"] = code;
      std::cout << doc_.dump( 2 ) << '\n';
    }
    else
    {
      std::cout << text_;
    }
    return code;
  }

private:
  bool as_json_;
  json doc_;
  std::string text_;
};

uint64_t resolve_seed( global_options const& g )
{
  if ( g.seed == "random" )
  {
    std::random_device rd;
    auto const seed = ( static_cast<uint64_t>( rd() ) << 32 ) | rd();
    std::cerr << fmt::format( "seed: {}\n", seed );
    return seed;
  }
  try
  {
    size_t used = 0;
    auto const seed = std::stoull( g.seed, &used );
    if ( used == g.seed.size() )
    {
      return seed;
    }
  }
  catch ( std::exception const& )
  {
  }
  throw CLI::ValidationError( "--seed", "expects a non-negative integer or `random`" );
}

uint32_t resolve_threads( global_options const& g )
{
  return g.threads == 0 ? std::max( 1u, std::thread::hardware_concurrency() ) : g.threads;
}

/* function given as --tf or as --tt with --vars */
struct function_options
{
  std::string tt;
  uint32_t vars = 0;
  std::string tf;

  void add( CLI::App* app )
  {
    auto* tt_opt = app->add_option( "--tt", tt, "truth table in hex, variable 1 is the least significant index bit" );
    app->add_option( "--vars", vars, "number of variables of --tt" )->needs( tt_opt )->check( CLI::Range( 0u, truth_table::max_vars ) );
    app->add_option( "--tf", tf, "threshold function as [w1,...,wn;T]" )->excludes( tt_opt );
  }

  truth_table table() const
  {
    if ( !tf.empty() )
    {
      return to_truth_table( parse_threshold_function( tf ) );
    }
    if ( tt.empty() )
    {
      throw CLI::RequiredError( "--tt or --tf" );
    }
    return from_hex( tt, vars );
  }
};

json spec_json( differential_spec const& spec, bool with_vt )
{
  auto side = [&]( std::vector<slot> const& slots ) {
    json arr = json::array();
    for ( auto const& s : slots )
    {
      json j;
      switch ( s.drive )
      {
      case slot_drive::tie0:
        j["signal"] = "0";
        break;
      case slot_drive::tie1:
        j["signal"] = "1";
        break;
      default:
        j["signal"] = spec.inputs[s.input];
      }
      j["polarity"] = s.complemented ? "complemented" : "true";
      if ( with_vt )
      {
        j["vt"] = s.vt == vt_class::low ? "LOW" : "HIGH";
      }
      arr.push_back( j );
    }
    return arr;
  };
  return json{ { "inputs", spec.inputs }, { "cell_size", spec.cell_size }, { "decoys", spec.reserved_decoys },
               { "left", side( spec.left ) }, { "right", side( spec.right ) }, { "notation", to_notation( spec, with_vt ) } };
}

std::string variant_name( cell_variant const& v )
{
  return fmt::format( "TLG-{}/{}", v.n, v.k );
}

/* single cell over `names` with `k` fresh decoy inputs d1..dk */
std::pair<differential_spec, instance_key> obfuscate_function( differential_spec const& spec, cell_variant const& variant, uint64_t seed )
{
  std::vector<std::string> pool;
  for ( uint32_t i = 1; i <= variant.k; ++i )
  {
    pool.push_back( fmt::format( "d{}", i ) );
  }
  return obfuscate_instance( spec, variant, pool, seed );
}

cell_variant pick_variant( differential_spec const& spec, uint32_t cell, uint32_t k )
{
  if ( cell != 0 && cell < spec.cell_size )
  {
    throw capacity_error( fmt::format( "function needs a TLG-{} cell, --cell {} is too small", spec.cell_size, cell ) );
  }
  return { cell == 0 ? spec.cell_size : cell, k };
}

std::filesystem::path resolve_key_path( std::string const& given, std::string const& netlist_path, netlist const& nl )
{
  if ( !given.empty() )
  {
    return given;
  }
  if ( nl.key_ref.empty() )
  {
    return {};
  }
  return std::filesystem::path( netlist_path ).parent_path() / nl.key_ref;
}

std::optional<obfuscation_key> load_key( std::filesystem::path const& path )
{
  if ( path.empty() )
  {
    return std::nullopt;
  }
  return read_key_file( path );
}

json stats_json( netlist_stats const& s )
{
  return json{ { "combinational", s.combinational }, { "flops", s.flops }, { "tlgs", s.tlgs }, { "sequential", s.sequential },
               { "nets", s.nets }, { "inputs", s.inputs }, { "outputs", s.outputs }, { "gates_by_type", s.gates_by_type },
               { "tlgs_by_variant", s.tlgs_by_variant } };
}

std::string bits_string( std::vector<uint8_t> const& v )
{
  std::string s;
  for ( auto b : v )
  {
    s += b ? '1' : '0';
  }
  return s;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Threshold logic synthesis and obfuscation flow" };
  app.require_subcommand( 1 );
  app.fallthrough();
  global_options g;
  app.add_flag( "--json", g.json, "print a JSON record instead of text" );
  app.add_option( "--seed", g.seed, "seed for randomized steps, or `random`" )->capture_default_str();
  app.add_option( "--threads", g.threads, "worker cap, 0 uses all cores" )->capture_default_str();

  int code = exit_ok;

  /* identify */
  auto* identify_cmd = app.add_subcommand( "identify", "decide whether a function is a threshold function" );
  function_options identify_fn;
  identify_fn.add( identify_cmd );
  int identify_bound = 0;
  identify_cmd->add_option( "--bound", identify_bound, "largest weight magnitude searched (default depends on n)" );
  identify_cmd->callback( [&] {
    output out( "identify", g.json );
    auto const tt = identify_fn.table();
    out["vars"] = tt.num_vars();
    out["tt"] = to_hex_prefixed( tt );
    auto const bound = identify_bound > 0 ? identify_bound : default_weight_bound( tt.num_vars() );
    out["bound"] = bound;
    if ( auto const tf = identify( tt, bound ) )
    {
      out["threshold"] = true;
      out["weights"] = tf->weights;
      out["threshold_value"] = tf->threshold;
      out["notation"] = to_string( *tf );
      out.line( "{}", to_string( *tf ) );
      code = out.finish( exit_ok );
    }
    else
    {
      out["threshold"] = false;
      out.line( "NOT_THRESHOLD" );
      code = out.finish( exit_negative );
    }
  } );

  /* map */
  auto* map_cmd = app.add_subcommand( "map", "map a threshold function to a differential cell" );
  function_options map_fn;
  map_fn.add( map_cmd );
  uint32_t map_k = 0;
  bool map_macro = false;
  map_cmd->add_option( "--k", map_k, "decoy positions to reserve per side" );
  map_cmd->add_flag( "--xor-macro", map_macro, "map 3-input parity to the two-cell macro" );
  map_cmd->callback( [&] {
    output out( "map", g.json );
    auto const tt = map_fn.table();
    out["vars"] = tt.num_vars();
    out["tt"] = to_hex_prefixed( tt );
    auto const names = default_input_names( tt.num_vars() );
    if ( auto const tf = identify( tt ) )
    {
      auto const spec = map_threshold_function( *tf, names, map_k );
      out["threshold"] = true;
      out["function"] = to_string( *tf );
      out["doubled"] = to_string( double_and_oddify( *tf ) );
      out["cells"] = json::array( { spec_json( spec, false ) } );
      out.line( "function: {}", to_string( *tf ) );
      out.line( "doubled: {}", to_string( double_and_oddify( *tf ) ) );
      out.line( "cell: TLG-{} (+{} decoys per side)", spec.cell_size, spec.reserved_decoys );
      out.line( "assignment: {}", to_notation( spec ) );
      code = out.finish( exit_ok );
      return;
    }
    auto const parity = tabulate( 3u, []( uint64_t m ) { return std::popcount( m ) % 2 == 1; } );
    if ( map_macro && tt.num_vars() == 3u && ( tt == parity || tt == complement( parity ) ) )
    {
      auto const macro = make_xor3_macro( names, "g", tt != parity );
      out["threshold"] = false;
      out["function"] = tt == parity ? "XOR3" : "XNOR3";
      out["cells"] = json::array( { spec_json( macro.first, false ), spec_json( macro.second, false ) } );
      out.line( "function: {} (two-cell macro)", tt == parity ? "XOR3" : "XNOR3" );
      out.line( "first: TLG-{} g = {}", macro.first.cell_size, to_notation( macro.first ) );
      out.line( "second: TLG-{} {}", macro.second.cell_size, to_notation( macro.second ) );
      code = out.finish( exit_ok );
      return;
    }
    out["threshold"] = false;
    out.line( "NOT_THRESHOLD" );
    code = out.finish( exit_negative );
  } );

  /* obfuscate */
  auto* obf_cmd = app.add_subcommand( "obfuscate", "obfuscate one threshold cell with high-Vt decoys on fresh inputs" );
  function_options obf_fn;
  obf_fn.add( obf_cmd );
  uint32_t obf_k = 2, obf_cell = 0;
  std::string obf_out, obf_key, obf_instance = "u1";
  obf_cmd->add_option( "--k", obf_k, "decoys per side" )->capture_default_str();
  obf_cmd->add_option( "--cell", obf_cell, "cell size n (default: smallest that fits)" );
  obf_cmd->add_option( "--instance", obf_instance, "instance name" )->capture_default_str();
  obf_cmd->add_option( "--out", obf_out, "write a one-cell BLIF netlist" );
  obf_cmd->add_option( "--key", obf_key, "write the key file" );
  obf_cmd->callback( [&] {
    output out( "obfuscate", g.json );
    auto const seed = resolve_seed( g );
    auto const tt = obf_fn.table();
    auto const tf = identify( tt );
    if ( !tf )
    {
      out["threshold"] = false;
      out.line( "NOT_THRESHOLD" );
      code = out.finish( exit_negative );
      return;
    }
    auto const names = default_input_names( tt.num_vars() );
    auto const spec = map_threshold_function( *tf, names );
    auto const variant = pick_variant( spec, obf_cell, obf_k );
    auto const [cell, ikey] = obfuscate_function( spec, variant, seed );
    obfuscation_key key{ seed, { { obf_instance, ikey } } };

    out["seed"] = seed;
    out["function"] = to_string( *tf );
    out["variant"] = variant_name( variant );
    out["in_library"] = in_library( variant );
    out["space"] = obfuscation_space( variant.n, variant.k );
    out["visible"] = spec_json( visible_structure( cell ), false );
    out.line( "seed: {}", seed );
    out.line( "function: {}", to_string( *tf ) );
    out.line( "variant: {}{}", variant_name( variant ), in_library( variant ) ? "" : " (not a library cell)" );
    out.line( "visible: {}", to_notation( visible_structure( cell ) ) );
    out.line( "space: {}", obfuscation_space( variant.n, variant.k ) );
    if ( !obf_out.empty() )
    {
      netlist nl( "cell" );
      for ( auto const& name : cell.inputs )
      {
        nl.inputs.push_back( nl.add_net( name ) );
      }
      nl.add_net( "clk" );
      nl.inputs.push_back( *nl.find_net( "clk" ) );
      tlg_instance t{ obf_instance, nl.add_net( "q" ), variant, tlg_stage::sequential, "clk", visible_structure( cell ) };
      nl.tlgs.push_back( t );
      nl.outputs.push_back( t.output );
      if ( !obf_key.empty() && variant.k > 0 )
      {
        nl.key_ref = std::filesystem::path( obf_key ).filename().string();
      }
      write_blif( obf_out, nl );
      out["netlist"] = obf_out;
      out.line( "netlist: {}", obf_out );
    }
    if ( !obf_key.empty() )
    {
      write_key_file( obf_key, key );
      out["key"] = obf_key;
      out.line( "key: {}", obf_key );
    }
    else
    {
      out["key_json"] = json::parse( key_to_json( key ).dump() );
      out.line( "key: {}", to_notation( cell, true ) );
    }
    code = out.finish( exit_ok );
  } );

  /* attack */
  auto* attack_cmd = app.add_subcommand( "attack", "enumerate the functions an attacker without Vt information must consider" );
  std::string attack_netlist, attack_instance;
  bool attack_prune = false, attack_list = false;
  attack_cmd->add_option( "--netlist", attack_netlist, "BLIF netlist" )->required()->check( CLI::ExistingFile );
  attack_cmd->add_option( "--instance", attack_instance, "one instance (default: all obfuscated instances)" );
  attack_cmd->add_flag( "--prune-ties", attack_prune, "drop hypotheses that tie on some input" );
  attack_cmd->add_flag( "--list", attack_list, "print every candidate table" );
  attack_cmd->callback( [&] {
    output out( "attack", g.json );
    auto const nl = read_blif( attack_netlist );
    std::vector<std::pair<std::string, uint64_t>> counts;
    json instances = json::array();
    bool found = false;
    for ( auto const& t : nl.tlgs )
    {
      if ( ( !attack_instance.empty() && t.name != attack_instance ) || ( attack_instance.empty() && t.variant.k == 0 ) )
      {
        continue;
      }
      found = true;
      auto const candidates = attacker_candidates( t.spec, t.variant, attack_prune );
      counts.emplace_back( t.name, candidates.size() );
      json inst{ { "name", t.name }, { "variant", variant_name( t.variant ) }, { "inputs", t.spec.inputs }, { "candidates", candidates.size() } };
      out.line( "{} {} candidates={} inputs={}", t.name, variant_name( t.variant ), candidates.size(), fmt::join( t.spec.inputs, "," ) );
      if ( attack_list || !attack_instance.empty() )
      {
        json tables = json::array();
        for ( auto const& c : candidates )
        {
          tables.push_back( to_hex_prefixed( c ) );
          out.line( "  {}", to_hex_prefixed( c ) );
        }
        inst["tables"] = tables;
      }
      instances.push_back( inst );
    }
    if ( !attack_instance.empty() && !found )
    {
      throw std::runtime_error( fmt::format( "no threshold cell named `{}`", attack_instance ) );
    }
    auto const summary = summarize_ambiguity( counts );
    out["prune_ties"] = attack_prune;
    out["instances"] = instances;
    out["ambiguous_instances"] = summary.ambiguous_instances;
    out["product"] = summary.product.str();
    out["log2_product"] = summary.log2_product();
    out["meets_power_bound"] = summary.meets_power_bound();
    out.line( "instances: {}", counts.size() );
    out.line( "ambiguous: {}", summary.ambiguous_instances );
    out.line( "product: {} (2^{:.2f})", summary.product.str(), summary.log2_product() );
    out.line( "product >= 2^{}: {}", summary.ambiguous_instances, summary.meets_power_bound() ? "yes" : "no" );
    code = out.finish( exit_ok );
  } );

  /* space */
  auto* space_cmd = app.add_subcommand( "space", "number of Vt assignments of a cell variant" );
  uint32_t space_n = 0, space_k = 0;
  bool space_explain = false;
  space_cmd->add_option( "--n", space_n, "valid slots per side" )->required();
  space_cmd->add_option( "--k", space_k, "decoy slots per side" )->required();
  space_cmd->add_flag( "--explain", space_explain, "show both readings of the slot count" );
  space_cmd->callback( [&] {
    output out( "space", g.json );
    auto const value = obfuscation_space( space_n, space_k );
    out["n"] = space_n;
    out["k"] = space_k;
    out["space"] = value;
    out.line( "{}", value );
    if ( space_explain )
    {
      auto const table = obfuscation_space_total_slots( space_n, space_k );
      out["formula"] = fmt::format( "C({}+{},{})^2", space_n, space_k, space_k );
      out["table_reading"] = table;
      out["table_formula"] = fmt::format( "C({},{})^2", space_n, space_k );
      out["discrepancy"] = table != value;
      out.line( "slots per side n+k = {}, choose the k high-Vt slots on each side: C({},{})^2 = {}", space_n + space_k, space_n + space_k,
                space_k, value );
      out.line( "reading n as the total slot count instead: C({},{})^2 = {}", space_n, space_k, table );
      out.line( "{}", table != value ? "the two readings disagree" : "the two readings agree" );
    }
    code = out.finish( exit_ok );
  } );

  /* safety */
  auto* safety_cmd = app.add_subcommand( "safety", "check that decoys cannot overturn a decision at nominal currents" );
  uint32_t safety_n = 0, safety_k = 0;
  device_params device;
  safety_cmd->add_option( "--n", safety_n, "valid slots per side" )->required();
  safety_cmd->add_option( "--k", safety_k, "decoy slots per side" )->required();
  safety_cmd->add_option( "--i-low", device.i_low, "low-Vt drive current (uA)" )->capture_default_str();
  safety_cmd->add_option( "--i-high", device.i_high, "high-Vt drive current (uA)" )->capture_default_str();
  safety_cmd->callback( [&] {
    output out( "safety", g.json );
    auto const r = safety_check( { safety_n, safety_k }, device );
    out["n"] = safety_n;
    out["k"] = safety_k;
    out["i_low"] = device.i_low;
    out["i_high"] = device.i_high;
    out["verdict"] = r.safe ? "SAFE" : "UNSAFE";
    out["max_safe_k"] = r.max_safe_k;
    out["worst_margin"] = r.worst_margin;
    out.line( "{}", r.safe ? "SAFE" : fmt::format( "UNSAFE(maxSafeK={})", r.max_safe_k ) );
    out.line( "max safe k: {}", r.max_safe_k );
    out.line( "worst-case margin: {:.6f} uA", r.worst_margin );
    code = out.finish( r.safe ? exit_ok : exit_negative );
  } );

  /* yield */
  auto* yield_cmd = app.add_subcommand( "yield", "Monte Carlo functional yield under Vt variation" );
  function_options yield_fn;
  yield_fn.add( yield_cmd );
  uint32_t yield_k = 2, yield_cell = 0;
  yield_params yp;
  yield_cmd->add_option( "--k", yield_k, "decoys per side" )->capture_default_str();
  yield_cmd->add_option( "--cell", yield_cell, "cell size n (default: smallest that fits)" );
  yield_cmd->add_option( "--trials", yp.trials, "Monte Carlo trials" )->capture_default_str()->check( CLI::PositiveNumber );
  yield_cmd->add_option( "--sigma-scale", yp.sigma_scale, "multiplier on the Vt sigmas" )->capture_default_str()->check( CLI::NonNegativeNumber );
  yield_cmd->callback( [&] {
    output out( "yield", g.json );
    yp.seed = resolve_seed( g );
    yp.threads = resolve_threads( g );
    auto const tt = yield_fn.table();
    auto const tf = identify( tt );
    if ( !tf )
    {
      out["threshold"] = false;
      out.line( "NOT_THRESHOLD" );
      code = out.finish( exit_negative );
      return;
    }
    auto const spec = map_threshold_function( *tf, default_input_names( tt.num_vars() ) );
    auto const variant = pick_variant( spec, yield_cell, yield_k );
    auto const cell = obfuscate_function( spec, variant, yp.seed ).first;
    device_params const params;
    auto const r = monte_carlo_yield( cell, params, yp );
    auto const safety = safety_check( variant, params );
    out["seed"] = yp.seed;
    out["function"] = to_string( *tf );
    out["variant"] = variant_name( variant );
    out["trials"] = r.trials;
    out["sigma_scale"] = yp.sigma_scale;
    out["passes"] = r.passes;
    out["yield"] = r.yield;
    out["ci_low"] = r.ci_low;
    out["ci_high"] = r.ci_high;
    out["min_margin"] = r.min_margin;
    out["safe"] = safety.safe;
    out.line( "seed: {}", yp.seed );
    out.line( "cell: {} {}", variant_name( variant ), to_notation( cell, true ) );
    out.line( "yield: {:.6f} ({} / {})", r.yield, r.passes, r.trials );
    out.line( "95% interval: [{:.6f}, {:.6f}]", r.ci_low, r.ci_high );
    out.line( "min margin: {:.6f} uA", r.min_margin );
    code = out.finish( exit_ok );
  } );

  /* simulate */
  auto* sim_cmd = app.add_subcommand( "simulate", "simulate a netlist under random stimulus" );
  std::string sim_in, sim_key, sim_vcd, sim_trace;
  uint64_t sim_cycles = 1000;
  double sim_activity = 0.3;
  sim_cmd->add_option( "--in", sim_in, "BLIF netlist" )->required()->check( CLI::ExistingFile );
  sim_cmd->add_option( "--key", sim_key, "key file (default: the one named in the netlist)" );
  sim_cmd->add_option( "--vcd", sim_vcd, "write a value change dump" );
  sim_cmd->add_option( "--trace", sim_trace, "write inputs and outputs per cycle" );
  sim_cmd->add_option( "--cycles", sim_cycles, "number of cycles" )->capture_default_str();
  sim_cmd->add_option( "--activity", sim_activity, "toggle probability per input and cycle" )->capture_default_str()->check( CLI::Range( 0.0, 1.0 ) );
  sim_cmd->callback( [&] {
    output out( "simulate", g.json );
    auto const seed = resolve_seed( g );
    auto const nl = read_blif( sim_in );
    auto const key = load_key( resolve_key_path( sim_key, sim_in, nl ) );
    auto const width = static_cast<uint32_t>( data_inputs( nl ).size() );
    auto const s = random_activity_stimulus( width, sim_cycles, sim_activity, seed );
    auto const trace = simulate( nl, key ? &*key : nullptr, s );
    auto const proxy = compute_power_proxy( nl, trace.activity );
    if ( !sim_vcd.empty() )
    {
      std::ofstream os( sim_vcd );
      if ( !os )
      {
        throw std::runtime_error( fmt::format( "cannot write `{}`", sim_vcd ) );
      }
      write_vcd( os, nl, key ? &*key : nullptr, s );
      out["vcd"] = sim_vcd;
    }
    if ( !sim_trace.empty() )
    {
      std::ofstream os( sim_trace );
      if ( !os )
      {
        throw std::runtime_error( fmt::format( "cannot write `{}`", sim_trace ) );
      }
      for ( size_t c = 0; c < s.size(); ++c )
      {
        os << c << ' ' << bits_string( s[c] ) << ' ' << bits_string( trace.outputs[c] ) << '\n';
      }
      out["trace"] = sim_trace;
    }
    uint64_t evaluations = 0;
    for ( auto e : trace.activity.tlg_evaluations )
    {
      evaluations += e;
    }
    out["seed"] = seed;
    out["cycles"] = trace.activity.cycles;
    out["activity"] = sim_activity;
    out["input_toggle_rate"] = toggle_rate( s );
    out["cmos_toggles"] = proxy.cmos_toggles;
    out["tlg_evaluations"] = evaluations;
    out["tlg_cost"] = proxy.tlg_cost;
    out["tlg_cost_per_cycle_variance"] = proxy.tlg_cost_per_cycle_variance;
    out.line( "seed: {}", seed );
    out.line( "cycles: {}", trace.activity.cycles );
    out.line( "input toggle rate: {:.4f}", toggle_rate( s ) );
    out.line( "CMOS toggles: {}", proxy.cmos_toggles );
    out.line( "TLG evaluations: {}", evaluations );
    out.line( "TLG cost per cycle: mean {:.3f} variance {:.3f}", proxy.tlg_cost_per_cycle_mean, proxy.tlg_cost_per_cycle_variance );
    if ( !sim_vcd.empty() )
    {
      out.line( "vcd: {}", sim_vcd );
    }
    code = out.finish( exit_ok );
  } );

  /* verify */
  auto* verify_cmd = app.add_subcommand( "verify", "sequential equivalence of an original and a hybrid netlist" );
  std::string verify_orig, verify_hybrid, verify_key, verify_mode = "random", verify_trace = "counterexample.trace";
  equivalence_params ep;
  verify_cmd->add_option( "--orig", verify_orig, "reference netlist" )->required()->check( CLI::ExistingFile );
  verify_cmd->add_option( "--hybrid", verify_hybrid, "netlist under test" )->required()->check( CLI::ExistingFile );
  verify_cmd->add_option( "--key", verify_key, "key of the netlist under test (default: the one it names)" );
  verify_cmd->add_option( "--mode", verify_mode, "exhaustive or random" )->capture_default_str()->check( CLI::IsMember( { "exhaustive", "random" } ) );
  verify_cmd->add_option( "--vectors", ep.vectors, "random vectors" )->capture_default_str();
  verify_cmd->add_option( "--trace", verify_trace, "where a counterexample is written" )->capture_default_str();
  verify_cmd->callback( [&] {
    output out( "verify", g.json );
    ep.seed = resolve_seed( g );
    ep.mode = verify_mode == "exhaustive" ? equivalence_mode::exhaustive : equivalence_mode::random;
    auto const a = read_blif( verify_orig );
    auto const b = read_blif( verify_hybrid );
    auto const key_a = load_key( resolve_key_path( "", verify_orig, a ) );
    auto const key_b = load_key( resolve_key_path( verify_key, verify_hybrid, b ) );
    auto const r = check_equivalence( a, key_a ? &*key_a : nullptr, b, key_b ? &*key_b : nullptr, ep );
    out["mode"] = verify_mode;
    out["seed"] = ep.seed;
    out["cycles"] = r.cycles_checked;
    out["verdict"] = r.equivalent ? "EQUIVALENT" : "COUNTEREXAMPLE";
    out.line( "{}", r.equivalent ? "EQUIVALENT" : "COUNTEREXAMPLE" );
    out.line( "cycles: {}", r.cycles_checked );
    if ( r.equivalent )
    {
      code = out.finish( exit_ok );
      return;
    }
    std::ofstream os( verify_trace );
    if ( !os )
    {
      throw std::runtime_error( fmt::format( "cannot write `{}`", verify_trace ) );
    }
    os << "# " << r.reason << '\n';
    os << "# inputs: " << fmt::format( "{}", fmt::join( r.input_names, " " ) ) << '\n';
    os << "# outputs: " << fmt::format( "{}", fmt::join( r.output_names, " " ) ) << '\n';
    for ( size_t c = 0; c < r.trace.size(); ++c )
    {
      os << c << ' ' << bits_string( r.trace[c] ) << '\n';
    }
    os << "# expected " << bits_string( r.expected ) << " got " << bits_string( r.actual ) << '\n';
    out["reason"] = r.reason;
    out["trace"] = verify_trace;
    out.line( "reason: {}", r.reason );
    out.line( "trace: {}", verify_trace );
    code = out.finish( exit_counterexample );
  } );

  /* hybridize */
  auto* hyb_cmd = app.add_subcommand( "hybridize", "absorb flops and threshold cones into obfuscated cells" );
  std::string hyb_in, hyb_out, hyb_key;
  hybridize_params hp;
  hyb_cmd->add_option( "--in", hyb_in, "input netlist" )->required()->check( CLI::ExistingFile );
  hyb_cmd->add_option( "--out", hyb_out, "output netlist" )->required();
  hyb_cmd->add_option( "--key", hyb_key, "output key file" )->required();
  hyb_cmd->add_option( "--max-inputs", hp.max_inputs, "largest cut" )->capture_default_str()->check( CLI::Range( 1u, 10u ) );
  hyb_cmd->add_option( "--k", hp.decoys, "decoys per side" )->capture_default_str();
  hyb_cmd->add_flag( "--xor-macro", hp.xor_macro, "also absorb 3-input parity cones" );
  hyb_cmd->add_option( "--cut-limit", hp.cut_limit, "cuts kept per net" )->capture_default_str();
  hyb_cmd->callback( [&] {
    output out( "hybridize", g.json );
    hp.seed = resolve_seed( g );
    hp.key_ref = std::filesystem::path( hyb_key ).filename().string();
    auto const nl = read_blif( hyb_in );
    auto const r = hybridize( nl, hp );
    write_blif( hyb_out, r.nl );
    write_key_file( hyb_key, r.key );
    auto const& rep = r.report;
    json replacements = json::array();
    for ( auto const& x : rep.replacements )
    {
      replacements.push_back( { { "flop", x.flop }, { "instance", x.instance }, { "function", x.function },
                                { "variant", variant_name( x.variant ) }, { "leaves", x.leaves }, { "absorbed", x.absorbed } } );
    }
    out["seed"] = hp.seed;
    out["flops_before"] = rep.flops_before;
    out["flops_after"] = rep.flops_after;
    out["combinational_before"] = rep.combinational_before;
    out["combinational_after"] = rep.combinational_after;
    out["absorbed"] = rep.absorbed;
    out["macros"] = rep.macros;
    out["tlgs_by_variant"] = rep.tlgs_by_variant;
    out["replacements"] = replacements;
    out["netlist"] = hyb_out;
    out["key"] = hyb_key;
    out.line( "seed: {}", hp.seed );
    out.line( "flops: {} -> {}", rep.flops_before, rep.flops_after );
    out.line( "combinational cells: {} -> {} ({} absorbed)", rep.combinational_before, rep.combinational_after, rep.absorbed );
    for ( auto const& [variant, count] : rep.tlgs_by_variant )
    {
      out.line( "{}: {}", variant, count );
    }
    out.line( "parity macros: {}", rep.macros );
    code = out.finish( exit_ok );
  } );

  /* stats */
  auto* stats_cmd = app.add_subcommand( "stats", "cell counts of a netlist" );
  std::string stats_in;
  stats_cmd->add_option( "--in", stats_in, "BLIF netlist" )->required()->check( CLI::ExistingFile );
  stats_cmd->callback( [&] {
    output out( "stats", g.json );
    auto const s = stats( read_blif( stats_in ) );
    out["stats"] = stats_json( s );
    out.line( "combinational: {}", s.combinational );
    out.line( "flops: {}", s.flops );
    out.line( "tlgs: {}", s.tlgs );
    out.line( "sequential: {}", s.sequential );
    out.line( "nets: {}", s.nets );
    out.line( "inputs: {}", s.inputs );
    out.line( "outputs: {}", s.outputs );
    for ( auto const& [type, count] : s.gates_by_type )
    {
      out.line( "{}: {}", type, count );
    }
    for ( auto const& [variant, count] : s.tlgs_by_variant )
    {
      out.line( "{}: {}", variant, count );
    }
    code = out.finish( exit_ok );
  } );

  /* bench */
  auto* bench_cmd = app.add_subcommand( "bench", "generate a verified benchmark netlist" );
  std::string bench_kind_name, bench_out;
  bench_params bp;
  bench_cmd->add_option( "kind", bench_kind_name, "wallace or fir" )->required()->check( CLI::IsMember( { "wallace", "fir" } ) );
  bench_cmd->add_option( "--width", bp.width, "operand width" )->capture_default_str();
  bench_cmd->add_option( "--stages", bp.stages, "pipeline stages (1 or 2)" )->capture_default_str();
  bench_cmd->add_option( "--taps", bp.taps, "FIR taps" )->capture_default_str();
  bench_cmd->add_option( "--coeffs", bp.coefficients, "FIR coefficients (default 3,-5,7,2,...)" )->delimiter( ',' );
  bench_cmd->add_option( "--out", bench_out, "output file (default: standard output)" );
  bench_cmd->callback( [&] {
    bp.kind = bench_kind_name == "wallace" ? bench_kind::wallace : bench_kind::fir;
    if ( bp.kind == bench_kind::fir && bp.coefficients.empty() )
    {
      bp.coefficients = default_fir_coefficients( bp.taps );
    }
    auto const nl = generate_bench( bp );
    if ( bench_out.empty() && !g.json )
    {
      std::cout << emit_blif( nl );
      code = exit_ok;
      return;
    }
    output out( "bench", g.json );
    out["kind"] = bench_kind_name;
    out["width"] = bp.width;
    out["stages"] = bp.stages;
    if ( bp.kind == bench_kind::fir )
    {
      out["coefficients"] = bp.coefficients;
    }
    out["stats"] = stats_json( stats( nl ) );
    if ( !bench_out.empty() )
    {
      write_blif( bench_out, nl );
      out["netlist"] = bench_out;
      out.line( "netlist: {}", bench_out );
    }
    else
    {
      out["blif"] = emit_blif( nl );
    }
    out.line( "combinational: {}", stats( nl ).combinational );
    out.line( "flops: {}", stats( nl ).flops );
    code = out.finish( exit_ok );
  } );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::CallForHelp const& e )
  {
    return app.exit( e );
  }
  catch ( CLI::ParseError const& e )
  {
    app.exit( e );
    if ( e.get_exit_code() != 0 )
    {
      std::cerr << app.help();
    }
    return exit_error;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return code;
}
