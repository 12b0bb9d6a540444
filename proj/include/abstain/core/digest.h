#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

namespace abstain {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Digest of several fields. Each field is length-prefixed, so ("ab","c")
/// and ("a","bc") hash differently.
std::string digest_fields(std::initializer_list<std::string_view> fields);

}  // namespace abstain
