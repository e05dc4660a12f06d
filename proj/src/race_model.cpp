#include <tlobf/race_model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <fmt/format.h>

#include <tlobf/errors.hpp>

namespace tlobf
{

double current_model::current( double abs_vt ) const
{
  auto const overdrive = vdd - abs_vt;
  return overdrive <= 0.0 ? 0.0 : k * std::pow( overdrive, alpha );
}

current_model calibrate_current_model( double vdd, double vt1, double i1, double vt2, double i2 )
{
  auto const o1 = vdd - vt1;
  auto const o2 = vdd - vt2;
  if ( o1 <= 0.0 || o2 <= 0.0 || i1 <= 0.0 || i2 <= 0.0 )
  {
    throw contract_error( "calibration points need positive overdrive and current" );
  }
  if ( o1 == o2 || i1 == i2 )
  {
    throw contract_error( "calibration points are degenerate" );
  }
  current_model m;
  m.vdd = vdd;
  m.alpha = std::log( i1 / i2 ) / std::log( o1 / o2 );
  if ( !( m.alpha > 0.0 ) )
  {
    throw contract_error( "calibration gives a non-positive exponent" );
  }
  m.k = i1 / std::pow( o1, m.alpha );
  return m;
}

current_model calibrate_current_model( device_params const& params )
{
  return calibrate_current_model( params.vdd, params.lvt.mean, params.i_low, params.hvt.mean, params.i_high );
}

double static_margin( differential_spec const& spec, std::span<const uint8_t> values, double i_low, double i_high )
{
  if ( values.size() != spec.inputs.size() )
  {
    throw contract_error( fmt::format( "cell has {} inputs, got {} values", spec.inputs.size(), values.size() ) );
  }
  auto drive = [&]( std::vector<slot> const& side ) {
    double total = 0.0;
    for ( auto const& s : side )
    {
      if ( s.conducts( values ) )
      {
        total += s.vt == vt_class::low ? i_low : i_high;
      }
    }
    return total;
  };
  return drive( spec.left ) - drive( spec.right );
}

double static_margin( differential_spec const& spec, std::span<const uint8_t> values, device_params const& params )
{
  return static_margin( spec, values, params.i_low, params.i_high );
}

safety_report safety_check( cell_variant const& variant, device_params const& params )
{
  if ( !( params.i_low > 0.0 ) || !( params.i_high > 0.0 ) )
  {
    throw contract_error( "drive currents must be positive" );
  }
  safety_report r;
  r.safe = variant.k * params.i_high < params.i_low;
  r.max_safe_k = static_cast<uint32_t>( std::ceil( params.i_low / params.i_high ) ) - 1u;
  r.worst_margin = params.i_low - variant.k * params.i_high;
  return r;
}

std::pair<double, double> wilson_interval( uint64_t passes, uint64_t trials )
{
  if ( trials == 0 )
  {
    return { 0.0, 1.0 };
  }
  constexpr double z = 1.959963984540054;
  auto const n = static_cast<double>( trials );
  auto const p = static_cast<double>( passes ) / n;
  auto const denom = 1.0 + z * z / n;
  auto const center = ( p + z * z / ( 2.0 * n ) ) / denom;
  auto const half = z * std::sqrt( p * ( 1.0 - p ) / n + z * z / ( 4.0 * n * n ) ) / denom;
  return { std::max( 0.0, center - half ), std::min( 1.0, center + half ) };
}

namespace
{

uint64_t splitmix64( uint64_t x )
{
  x += 0x9e3779b97f4a7c15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebull;
  return x ^ ( x >> 31 );
}

struct partial_yield
{
  uint64_t passes = 0;
  double min_margin = std::numeric_limits<double>::infinity();
};

} // namespace

yield_result monte_carlo_yield( differential_spec const& spec, device_params const& params, yield_params const& yp )
{
  if ( yp.trials == 0 )
  {
    throw contract_error( "yield needs at least one trial" );
  }
  if ( yp.sigma_scale < 0.0 )
  {
    throw contract_error( "sigma scale must be non-negative" );
  }
  auto const num_inputs = static_cast<uint32_t>( spec.inputs.size() );
  if ( num_inputs > truth_table::max_vars )
  {
    throw capacity_error( fmt::format( "cell has {} inputs, at most {} can be swept", num_inputs, truth_table::max_vars ) );
  }
  auto const model = calibrate_current_model( params );

  /* ideal output and conduction pattern per assignment */
  uint64_t const num_assignments = uint64_t{ 1 } << num_inputs;
  std::vector<uint8_t> ideal( num_assignments );
  std::vector<std::vector<uint8_t>> left_on( num_assignments ), right_on( num_assignments );
  for ( uint64_t m = 0; m < num_assignments; ++m )
  {
    auto const values = decode_assignment( m, num_inputs );
    ideal[m] = eval_diff( spec, values ) ? 1u : 0u;
    for ( auto const& s : spec.left )
    {
      left_on[m].push_back( s.conducts( values ) ? 1u : 0u );
    }
    for ( auto const& s : spec.right )
    {
      right_on[m].push_back( s.conducts( values ) ? 1u : 0u );
    }
  }

  auto run = [&]( uint64_t begin, uint64_t end ) {
    partial_yield out;
    std::vector<double> il( spec.left.size() ), ir( spec.right.size() );
    for ( uint64_t trial = begin; trial < end; ++trial )
    {
      std::mt19937_64 rng( splitmix64( yp.seed ^ splitmix64( trial ) ) );
      auto sample = [&]( slot const& s ) {
        auto const& dist = s.vt == vt_class::low ? params.lvt : params.hvt;
        auto const sigma = dist.sigma * yp.sigma_scale;
        auto const vt = sigma > 0.0 ? std::normal_distribution<double>( dist.mean, sigma )( rng ) : dist.mean;
        return model.current( std::abs( vt ) );
      };
      for ( size_t i = 0; i < spec.left.size(); ++i )
      {
        il[i] = sample( spec.left[i] );
      }
      for ( size_t i = 0; i < spec.right.size(); ++i )
      {
        ir[i] = sample( spec.right[i] );
      }
      bool pass = true;
      for ( uint64_t m = 0; m < num_assignments; ++m )
      {
        double margin = 0.0;
        for ( size_t i = 0; i < il.size(); ++i )
        {
          margin += left_on[m][i] ? il[i] : 0.0;
        }
        for ( size_t i = 0; i < ir.size(); ++i )
        {
          margin -= right_on[m][i] ? ir[i] : 0.0;
        }
        auto const toward = ideal[m] ? margin : -margin;
        out.min_margin = std::min( out.min_margin, toward );
        pass = pass && toward > 0.0;
      }
      out.passes += pass;
    }
    return out;
  };

  auto const workers = static_cast<uint32_t>( std::clamp<uint64_t>( yp.threads, 1u, yp.trials ) );
  std::vector<partial_yield> parts( workers );
  if ( workers == 1 )
  {
    parts[0] = run( 0, yp.trials );
  }
  else
  {
    std::vector<std::thread> pool;
    for ( uint32_t w = 0; w < workers; ++w )
    {
      auto const begin = yp.trials * w / workers;
      auto const end = yp.trials * ( w + 1 ) / workers;
      pool.emplace_back( [&, w, begin, end] { parts[w] = run( begin, end ); } );
    }
    for ( auto& t : pool )
    {
      t.join();
    }
  }

  yield_result r;
  r.trials = yp.trials;
  r.min_margin = std::numeric_limits<double>::infinity();
  for ( auto const& p : parts )
  {
    r.passes += p.passes;
    r.min_margin = std::min( r.min_margin, p.min_margin );
  }
  r.yield = static_cast<double>( r.passes ) / static_cast<double>( r.trials );
  std::tie( r.ci_low, r.ci_high ) = wilson_interval( r.passes, r.trials );
  return r;
}

} // namespace tlobf
