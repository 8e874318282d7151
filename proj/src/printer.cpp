#include <invsynth/printer.hpp>

#include <invsynth/parser.hpp>

#include <sstream>

namespace invsynth {

std::string to_c_string(const expr &e)
{
  if(e.kind() == expr_kind::bool_const)
    return e.value() ? "1" : "0";
  std::string text = to_string(e);
  // \true and \false only ever occur as whole conditions in parsed C code;
  // nested occurrences come from annotations and are kept as is
  return text;
}

namespace {

class program_printer
{
public:
  explicit program_printer(const program &p) : p_(p) {}

  std::string run()
  {
    out_ << (p_.returns_int ? "int " : "void ") << p_.name << "()\n{\n";
    declarations(decl_scope::function, 1);
    items(p_.prefix, 1);
    loop_start_ = static_cast<std::size_t>(out_.tellp());
    indent(1);
    out_ << "while (" << condition(p_.loop_guard) << ")\n";
    indent(1);
    out_ << "{\n";
    declarations(decl_scope::loop_body, 2);
    items(p_.loop_body, 2);
    indent(1);
    out_ << "}\n";
    declarations(decl_scope::after_loop, 1);
    items(p_.suffix, 1);
    out_ << "}\n";
    return out_.str();
  }

  std::size_t loop_start() const { return loop_start_; }

private:
  void indent(int depth)
  {
    for(int i = 0; i < depth; ++i)
      out_ << "  ";
  }

  void declarations(decl_scope scope, int depth)
  {
    for(const auto &d : p_.decls)
    {
      if(d.scope != scope)
        continue;
      indent(depth);
      out_ << (d.kind == int_kind::unsigned_int ? "unsigned int " : "int ") << d.name << ";\n";
    }
  }

  static std::string condition(const expr &e)
  {
    if(e.kind() == expr_kind::nondet)
      return "unknown_int()";
    return to_c_string(e);
  }

  void items(const stmt &s, int depth)
  {
    for(const auto &c : s.children)
      statement(c, depth);
  }

  void block(const stmt &s, int depth)
  {
    indent(depth);
    out_ << "{\n";
    items(s, depth + 1);
    indent(depth);
    out_ << "}\n";
  }

  void statement(const stmt &s, int depth)
  {
    switch(s.kind)
    {
    case stmt_kind::skip:
      return;
    case stmt_kind::assign:
      indent(depth);
      out_ << s.target << " = " << to_string(s.value) << ";\n";
      return;
    case stmt_kind::havoc:
      indent(depth);
      out_ << s.target << " = "
           << (p_.find_decl(s.target) != nullptr &&
                   p_.find_decl(s.target)->kind == int_kind::unsigned_int
                 ? "unknown_uint()"
                 : "unknown_int()")
           << ";\n";
      return;
    case stmt_kind::assume:
      indent(depth);
      out_ << "assume(" << condition(s.value) << ");\n";
      return;
    case stmt_kind::assert_:
      indent(depth);
      out_ << "//@ assert " << to_string(s.value) << ";\n";
      return;
    case stmt_kind::seq:
      block(s, depth);
      return;
    case stmt_kind::if_else:
      indent(depth);
      out_ << "if (" << condition(s.value) << ")\n";
      block(s.children[0], depth);
      if(!s.children[1].children.empty() || s.children[1].kind != stmt_kind::seq)
      {
        indent(depth);
        out_ << "else\n";
        block(s.children[1], depth);
      }
      return;
    case stmt_kind::return_:
      indent(depth);
      out_ << (p_.returns_int ? "return 0;\n" : "return;\n");
      return;
    case stmt_kind::break_:
      indent(depth);
      out_ << "break;\n";
      return;
    case stmt_kind::continue_:
      indent(depth);
      out_ << "continue;\n";
      return;
    }
  }

  const program &p_;
  std::ostringstream out_;
  std::size_t loop_start_ = 0;
};

std::string annotation_block(const candidate_set &candidates, const std::string &indentation)
{
  std::string out = indentation + "/*@\n";
  for(const auto &c : candidates)
    out += indentation + "  loop invariant " + c.source + ";\n";
  out += indentation + "*/\n";
  return out;
}

} // namespace

std::string pretty_print(const program &p)
{
  return program_printer(p).run();
}

std::string annotate(const program &p, const candidate_set &candidates)
{
  std::string text = p.source_text;
  std::size_t loop_line = p.loop_line_offset;
  if(text.empty())
  {
    program_printer printer(p);
    text = printer.run();
    loop_line = printer.loop_start();
  }

  std::size_t insert_at = loop_line;
  std::size_t erase_to = loop_line;
  if(!p.source_text.empty() && p.annotation_span)
  {
    insert_at = p.annotation_span->first;
    erase_to = p.annotation_span->second;
  }

  std::string indentation;
  for(std::size_t i = loop_line; i < text.size() && (text[i] == ' ' || text[i] == '\t'); ++i)
    indentation += text[i];

  return text.substr(0, insert_at) + annotation_block(candidates, indentation) +
         text.substr(erase_to);
}

} // namespace invsynth
