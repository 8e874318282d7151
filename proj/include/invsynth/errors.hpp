#pragma once

#include <stdexcept>
#include <string>

namespace invsynth {

class error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed program or expression text, with a 1-based source position.
class syntax_error : public error
{
public:
  syntax_error(const std::string &message, int line, int column)
    : error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message)
  {
  }

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string &bare_message() const { return message_; }

private:
  int line_;
  int column_;
  std::string message_;
};

/// Well-formed C that lies outside the verifiable subset (arrays, pointers,
/// nested loops, ...). The offending construct is named in the message.
class unsupported_feature : public error
{
public:
  explicit unsupported_feature(const std::string &construct)
    : error("unsupported feature: " + construct), construct_(construct)
  {
  }

  const std::string &construct() const { return construct_; }

private:
  std::string construct_;
};

class missing_expr : public error
{
public:
  using error::error;
};

class solver_spawn_error : public error
{
public:
  using error::error;
};

class solver_protocol_error : public error
{
public:
  using error::error;
};

/// Two configured solvers disagreed (one proved, one refuted) on one query.
class solver_integrity_error : public error
{
public:
  using error::error;
};

class provider_error : public error
{
public:
  using error::error;
};

class auth_error : public provider_error
{
public:
  using provider_error::provider_error;
};

class missing_placeholder_value : public error
{
public:
  using error::error;
};

} // namespace invsynth
