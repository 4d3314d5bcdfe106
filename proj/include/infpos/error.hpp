#pragma once

#include <stdexcept>
#include <string>

namespace infpos {

// Error categories. The CLI maps these onto distinct exit codes.
enum class Errc {
  config,            // invalid configuration value
  domain,            // argument outside an operation's domain
  data,              // malformed in-memory data (non-finite, empty, ...)
  format_magic,      // dataset/checkpoint file: bad magic
  format_version,    // unsupported format version
  format_truncated,  // file shorter than the header promises
  format_count,      // header count disagrees with payload
  io,                // filesystem failure
  numeric,           // NaN/Inf surfaced during computation
  no_fix,            // solver failed to converge
  usage,             // bad CLI invocation
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace infpos
