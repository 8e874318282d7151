#pragma once

#include <invsynth/errors.hpp>
#include <invsynth/parser.hpp>
#include <invsynth/smt.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace support {

inline std::string source_dir() { return INVSYNTH_SOURCE_DIR; }

inline std::string read_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if(!in)
    throw invsynth::error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string exemplar_path(const std::string &name) { return source_dir() + "/bench/exemplars/" + name; }
inline std::string exemplar(const std::string &name) { return read_file(exemplar_path(name)); }

/// Count-down program: x = n, y = 0, while(x > 0){x--; y++}, assert y == n.
inline invsynth::program count_down() { return invsynth::parse_program(exemplar("count_down_signed.c")); }
inline invsynth::program count_down_unsigned() { return invsynth::parse_program(exemplar("count_down.c")); }
inline invsynth::program bounded_steps() { return invsynth::parse_program(exemplar("bounded_steps.c")); }
inline invsynth::program garbage_y() { return invsynth::parse_program(exemplar("garbage_y.c")); }

inline invsynth::candidate_set cands(std::initializer_list<const char *> texts)
{
  invsynth::candidate_set out;
  std::size_t id = 0;
  for(const char *t : texts)
    out.insert(invsynth::parse_invariant(t, id++));
  return out;
}

inline bool have_z3()
{
  static const bool found = [] {
    try
    {
      return invsynth::run_process({"z3", "-version"}, "", 5000).exit_code == 0;
    }
    catch(const invsynth::error &)
    {
      return false;
    }
  }();
  return found;
}

} // namespace support

#define REQUIRE_Z3()                                                                                              \
  do                                                                                                              \
  {                                                                                                               \
    if(!support::have_z3())                                                                                       \
      GTEST_SKIP() << "z3 not on PATH";                                                                           \
  } while(0)
