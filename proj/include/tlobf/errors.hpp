#pragma once

#include <stdexcept>
#include <string>

namespace tlobf
{

/*! \brief Violated precondition of a public operation (wrong lengths, bad indices, ...). */
class contract_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/*! \brief Input exceeds a fixed capacity (variable count, cell size, bench width). */
class capacity_error : public std::length_error
{
public:
  using std::length_error::length_error;
};

/*! \brief A differential cell saw equal conducting drive on both sides. */
class tie_violation : public std::runtime_error
{
public:
  explicit tie_violation( std::string const& what, unsigned long long witness = 0u )
      : std::runtime_error( what ), witness_( witness )
  {
  }

  /*! \brief Input index (little-endian over the cell's inputs) that produced the tie. */
  unsigned long long witness() const noexcept { return witness_; }

private:
  unsigned long long witness_;
};

/*! \brief Obfuscated cells were simulated without a key. */
class key_required_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace tlobf
