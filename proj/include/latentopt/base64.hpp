#pragma once

#include <string>
#include <string_view>

namespace latentopt {

/// RFC 4648 standard alphabet with '=' padding.
std::string base64_encode(std::string_view bytes);
/// Throws ProtocolError on characters outside the alphabet or bad padding.
std::string base64_decode(std::string_view text);

}  // namespace latentopt
