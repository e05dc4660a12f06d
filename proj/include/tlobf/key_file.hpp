#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include <tlobf/obfuscate.hpp>

namespace tlobf
{

/*! \brief JSON form of a key; layout documented in docs/key_format.md. */
nlohmann::json key_to_json( obfuscation_key const& key );
/*! \brief Throws `contract_error` on schema violations. */
obfuscation_key key_from_json( nlohmann::json const& doc );

void write_key_file( std::filesystem::path const& path, obfuscation_key const& key );
obfuscation_key read_key_file( std::filesystem::path const& path );

} // namespace tlobf
