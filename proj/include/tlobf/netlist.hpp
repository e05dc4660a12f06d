#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <tlobf/boolfn.hpp>
#include <tlobf/obfuscate.hpp>
#include <tlobf/tlg_map.hpp>

namespace tlobf
{

using net_id = uint32_t;

enum class gate_type : uint8_t
{
  const0,
  const1,
  buf,
  inv,
  and2,
  nand2,
  or2,
  nor2,
  xor2,
  xnor2,
  maj3,
  lut /*!< any other `.names` cover */
};

std::string_view gate_type_name( gate_type type );
/*! \brief Function of a primitive gate over its fanins; `lut` has none. */
truth_table gate_function( gate_type type );
/*! \brief Primitive type realizing `function`, or `lut`. */
gate_type classify_gate( truth_table const& function );

struct gate
{
  gate_type type = gate_type::lut;
  std::vector<net_id> fanins;
  net_id output = 0;
  truth_table function; /*!< over fanins, fanin 0 least significant */
};

struct latch
{
  net_id d = 0;
  net_id q = 0;
  std::string type;  /*!< BLIF latch type (`re`, `fe`, ...), empty if omitted */
  std::string clock; /*!< control net name, empty if omitted */
  bool init = false;
};

enum class tlg_stage : uint8_t
{
  sequential,   /*!< latches on the clock edge like a flop */
  combinational /*!< first level of a macro, settles within the cycle */
};

/*! \brief Threshold cell instance; `spec.inputs` are net names and `spec` holds
    only the visible structure (all slots low Vt), the Vt classes live in the key. */
struct tlg_instance
{
  std::string name;
  net_id output = 0;
  cell_variant variant;
  tlg_stage stage = tlg_stage::sequential;
  std::string clock;
  differential_spec spec;
};

enum class netlist_errc
{
  syntax,
  multiple_drivers,
  undriven_net,
  combinational_loop,
  unsupported
};

std::string_view errc_name( netlist_errc code );

class netlist_error : public std::runtime_error
{
public:
  netlist_error( netlist_errc code, std::string const& message, uint32_t line = 0, uint32_t column = 0 );

  netlist_errc code() const noexcept { return code_; }
  uint32_t line() const noexcept { return line_; }
  uint32_t column() const noexcept { return column_; }

private:
  netlist_errc code_;
  uint32_t line_, column_;
};

/*! \brief Sequential gate-level netlist of primitive gates, flops and threshold cells. */
class netlist
{
public:
  explicit netlist( std::string model = "top" ) : model_( std::move( model ) ) {}

  std::string const& model() const noexcept { return model_; }

  net_id add_net( std::string const& name );
  /*! \brief Existing net or a new one. */
  net_id net( std::string const& name );
  std::optional<net_id> find_net( std::string const& name ) const;
  std::string const& net_name( net_id id ) const { return names_.at( id ); }
  uint32_t num_nets() const noexcept { return static_cast<uint32_t>( names_.size() ); }

  std::vector<net_id> inputs;
  std::vector<net_id> outputs;
  std::vector<gate> gates;
  std::vector<latch> latches;
  std::vector<tlg_instance> tlgs;
  /*! \brief Key file the `.tlg` stanzas refer to. */
  std::string key_ref;

  /*! \brief Drops nets no cell or port mentions and renumbers the rest. */
  void compact();

private:
  std::string model_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, net_id> ids_;
};

/*! \brief Who drives a net. */
struct driver
{
  enum class kind : uint8_t
  {
    none,
    input,
    gate,
    latch,
    tlg
  } what = kind::none;
  uint32_t index = 0;
};

std::vector<driver> compute_drivers( netlist const& nl );

/*! \brief Gates and combinational cells in evaluation order.

  Entries are `driver`s of kind `gate` or `tlg`.  Throws `netlist_error` with
  `combinational_loop` if the combinational part is cyclic.
*/
std::vector<driver> topological_order( netlist const& nl );

/*! \brief Checks single drivers, driven fanins and acyclicity. */
void validate( netlist const& nl );

/*! \brief Clock nets used by flops and sequential cells. */
std::vector<std::string> clock_nets( netlist const& nl );
/*! \brief Primary inputs without the clock nets, in declaration order. */
std::vector<net_id> data_inputs( netlist const& nl );

/*! \brief Comparison by names, independent of net numbering. */
bool structurally_equal( netlist const& a, netlist const& b );

netlist parse_blif( std::string_view text );
std::string emit_blif( netlist const& nl );
netlist read_blif( std::filesystem::path const& path );
void write_blif( std::filesystem::path const& path, netlist const& nl );

struct netlist_stats
{
  std::map<std::string, uint32_t> gates_by_type;
  std::map<std::string, uint32_t> tlgs_by_variant; /*!< keyed `TLG-n/k` */
  uint32_t combinational = 0;                      /*!< primitive gates */
  uint32_t flops = 0;
  uint32_t tlgs = 0;
  uint32_t sequential = 0; /*!< flops plus sequential threshold cells */
  uint32_t nets = 0;
  uint32_t inputs = 0;
  uint32_t outputs = 0;
};

netlist_stats stats( netlist const& nl );

} // namespace tlobf
