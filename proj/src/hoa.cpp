#include "marlshape/hoa.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace marlshape::hoa {

GuardPtr guard_true() {
  static const GuardPtr g = std::make_shared<Guard>(Guard{GuardKind::True, -1, nullptr, nullptr});
  return g;
}

GuardPtr guard_false() {
  static const GuardPtr g = std::make_shared<Guard>(Guard{GuardKind::False, -1, nullptr, nullptr});
  return g;
}

GuardPtr guard_ap(int ap_index) {
  return std::make_shared<Guard>(Guard{GuardKind::Ap, ap_index, nullptr, nullptr});
}

GuardPtr guard_not(GuardPtr g) {
  return std::make_shared<Guard>(Guard{GuardKind::Not, -1, std::move(g), nullptr});
}

GuardPtr guard_and(GuardPtr a, GuardPtr b) {
  return std::make_shared<Guard>(Guard{GuardKind::And, -1, std::move(a), std::move(b)});
}

GuardPtr guard_or(GuardPtr a, GuardPtr b) {
  return std::make_shared<Guard>(Guard{GuardKind::Or, -1, std::move(a), std::move(b)});
}

bool eval_guard(const Guard& g, LabelMask labels) {
  switch (g.kind) {
    case GuardKind::True:
      return true;
    case GuardKind::False:
      return false;
    case GuardKind::Ap:
      return (labels >> g.ap) & 1u;
    case GuardKind::Not:
      return !eval_guard(*g.lhs, labels);
    case GuardKind::And:
      return eval_guard(*g.lhs, labels) && eval_guard(*g.rhs, labels);
    case GuardKind::Or:
      return eval_guard(*g.lhs, labels) || eval_guard(*g.rhs, labels);
  }
  return false;
}

bool guards_equal(const Guard& a, const Guard& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case GuardKind::True:
    case GuardKind::False:
      return true;
    case GuardKind::Ap:
      return a.ap == b.ap;
    case GuardKind::Not:
      return guards_equal(*a.lhs, *b.lhs);
    case GuardKind::And:
    case GuardKind::Or:
      return guards_equal(*a.lhs, *b.lhs) && guards_equal(*a.rhs, *b.rhs);
  }
  return false;
}

int max_ap_index(const Guard& g) {
  switch (g.kind) {
    case GuardKind::True:
    case GuardKind::False:
      return -1;
    case GuardKind::Ap:
      return g.ap;
    case GuardKind::Not:
      return max_ap_index(*g.lhs);
    case GuardKind::And:
    case GuardKind::Or:
      return std::max(max_ap_index(*g.lhs), max_ap_index(*g.rhs));
  }
  return -1;
}

namespace {

// Precedence for printing: Or < And < Not/atom.
void print_guard(const Guard& g, std::string& out, int parent_level) {
  const auto needs_parens = [&](int level) { return level < parent_level; };
  switch (g.kind) {
    case GuardKind::True:
      out += 't';
      return;
    case GuardKind::False:
      out += 'f';
      return;
    case GuardKind::Ap:
      out += std::to_string(g.ap);
      return;
    case GuardKind::Not:
      out += '!';
      if (g.lhs->kind == GuardKind::And || g.lhs->kind == GuardKind::Or) {
        out += '(';
        print_guard(*g.lhs, out, 0);
        out += ')';
      } else {
        print_guard(*g.lhs, out, 2);
      }
      return;
    case GuardKind::And: {
      const bool parens = needs_parens(1);
      if (parens) out += '(';
      print_guard(*g.lhs, out, 1);
      out += " & ";
      print_guard(*g.rhs, out, 1);
      if (parens) out += ')';
      return;
    }
    case GuardKind::Or: {
      const bool parens = needs_parens(0);
      if (parens) out += '(';
      print_guard(*g.lhs, out, 0);
      out += " | ";
      print_guard(*g.rhs, out, 0);
      if (parens) out += ')';
      return;
    }
  }
}

}  // namespace

std::string guard_to_string(const Guard& g) {
  std::string out;
  print_guard(g, out, 0);
  return out;
}

bool HoaTransition::in_buchi_set() const {
  return std::find(acc_sets.begin(), acc_sets.end(), 0) != acc_sets.end();
}

bool operator==(const HoaTransition& a, const HoaTransition& b) {
  return a.target == b.target && a.acc_sets == b.acc_sets && guards_equal(*a.guard, *b.guard);
}

bool operator==(const HoaState& a, const HoaState& b) {
  return a.transitions == b.transitions;
}

bool operator==(const HoaDocument& a, const HoaDocument& b) {
  return a.name == b.name && a.num_states == b.num_states && a.start_state == b.start_state &&
         a.ap_names == b.ap_names && a.acceptance == b.acceptance && a.states == b.states;
}

HoaError::HoaError(const std::string& msg, int line_, int col_)
    : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                         std::to_string(col_) + ")"),
      line(line_),
      column(col_) {}

namespace {

enum class TokKind { Ident, HeaderName, Int, String, LBracket, RBracket, LBrace, RBrace,
                     LParen, RParen, Not, And, Or, BodyMarker, EndMarker, Eof };

struct Token {
  TokKind kind = TokKind::Eof;
  std::string text;
  long value = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws_and_comments();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= text_.size()) {
      tok.kind = TokKind::Eof;
      return tok;
    }
    const char c = text_[pos_];
    if (c == '[') return single(TokKind::LBracket, tok);
    if (c == ']') return single(TokKind::RBracket, tok);
    if (c == '{') return single(TokKind::LBrace, tok);
    if (c == '}') return single(TokKind::RBrace, tok);
    if (c == '(') return single(TokKind::LParen, tok);
    if (c == ')') return single(TokKind::RParen, tok);
    if (c == '!') return single(TokKind::Not, tok);
    if (c == '&') return single(TokKind::And, tok);
    if (c == '|') return single(TokKind::Or, tok);
    if (c == '"') return lex_string(tok);
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_int(tok);
    if (c == '-' && text_.substr(pos_).rfind("--", 0) == 0) return lex_marker(tok);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident(tok);
    throw HoaSyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  // Consumes the remainder of the current line (for ignored headers).
  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') advance();
  }

 private:
  Token single(TokKind kind, Token tok) {
    tok.kind = kind;
    tok.text = text_[pos_];
    advance();
    return tok;
  }

  Token lex_string(Token tok) {
    advance();  // opening quote
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) advance();
      value += text_[pos_];
      advance();
    }
    if (pos_ >= text_.size()) throw HoaSyntaxError("unterminated string", tok.line, tok.col);
    advance();  // closing quote
    tok.kind = TokKind::String;
    tok.text = std::move(value);
    return tok;
  }

  Token lex_int(Token tok) {
    long v = 0;
    std::string text;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      text += text_[pos_];
      advance();
    }
    tok.kind = TokKind::Int;
    tok.value = v;
    tok.text = std::move(text);
    return tok;
  }

  Token lex_marker(Token tok) {
    std::string text;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      text += text_[pos_];
      advance();
    }
    if (text == "--BODY--") {
      tok.kind = TokKind::BodyMarker;
    } else if (text == "--END--") {
      tok.kind = TokKind::EndMarker;
    } else {
      throw HoaSyntaxError("unknown marker '" + text + "'", tok.line, tok.col);
    }
    tok.text = std::move(text);
    return tok;
  }

  Token lex_ident(Token tok) {
    std::string text;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        text += c;
        advance();
      } else {
        break;
      }
    }
    if (pos_ < text_.size() && text_[pos_] == ':') {
      advance();
      tok.kind = TokKind::HeaderName;
    } else {
      tok.kind = TokKind::Ident;
    }
    tok.text = std::move(text);
    return tok;
  }

  void skip_ws_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) advance();
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (pos_ < text_.size()) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  HoaDocument parse() {
    expect_header("HOA");
    if (cur_.kind != TokKind::Ident || cur_.text != "v1")
      throw HoaSyntaxError("expected HOA version 'v1'", cur_.line, cur_.col);
    shift();

    HoaDocument doc;
    bool have_states = false, have_start = false, have_aps = false, have_acc = false;
    while (cur_.kind == TokKind::HeaderName) {
      const std::string header = cur_.text;
      const int hline = cur_.line, hcol = cur_.col;
      if (header == "Alias") throw HoaUnsupportedError("aliases are not supported", hline, hcol);
      shift();
      if (header == "States") {
        if (have_states) throw HoaSemanticError("duplicate States header", hline, hcol);
        doc.num_states = static_cast<int>(expect_int("state count"));
        have_states = true;
      } else if (header == "Start") {
        if (have_start)
          throw HoaUnsupportedError("multiple start states are not supported", hline, hcol);
        doc.start_state = static_cast<int>(expect_int("start state"));
        if (cur_.kind == TokKind::And || cur_.kind == TokKind::Int)
          throw HoaUnsupportedError("multiple start states are not supported", cur_.line, cur_.col);
        have_start = true;
      } else if (header == "AP") {
        if (have_aps) throw HoaSemanticError("duplicate AP header", hline, hcol);
        const long count = expect_int("AP count");
        if (count > kMaxAps)
          throw HoaUnsupportedError("too many atomic propositions", hline, hcol);
        for (long i = 0; i < count; ++i) {
          if (cur_.kind != TokKind::String)
            throw HoaSyntaxError("expected quoted AP name", cur_.line, cur_.col);
          doc.ap_names.push_back(cur_.text);
          shift();
        }
        for (std::size_t i = 0; i < doc.ap_names.size(); ++i)
          for (std::size_t j = i + 1; j < doc.ap_names.size(); ++j)
            if (doc.ap_names[i] == doc.ap_names[j])
              throw HoaSemanticError("duplicate AP name \"" + doc.ap_names[i] + "\"", hline, hcol);
        have_aps = true;
      } else if (header == "Acceptance") {
        if (have_acc) throw HoaSemanticError("duplicate Acceptance header", hline, hcol);
        parse_acceptance(doc, hline, hcol);
        have_acc = true;
      } else if (header == "name") {
        if (cur_.kind != TokKind::String)
          throw HoaSyntaxError("expected quoted automaton name", cur_.line, cur_.col);
        doc.name = cur_.text;
        shift();
      } else if (header == "acc-name" || header == "tool" || header == "properties") {
        // Informational only; skip the rest of the line.
        lexer_.skip_line();
        shift();
      } else {
        throw HoaUnsupportedError("unsupported header '" + header + ":'", hline, hcol);
      }
    }

    if (!have_states) throw HoaSyntaxError("missing States header", cur_.line, cur_.col);
    if (!have_start) throw HoaSyntaxError("missing Start header", cur_.line, cur_.col);
    if (!have_acc) throw HoaSyntaxError("missing Acceptance header", cur_.line, cur_.col);
    if (doc.num_states <= 0)
      throw HoaSemanticError("state count must be positive", cur_.line, cur_.col);
    if (doc.start_state >= doc.num_states)
      throw HoaSemanticError("start state out of range", cur_.line, cur_.col);

    if (cur_.kind != TokKind::BodyMarker)
      throw HoaSyntaxError("expected --BODY--", cur_.line, cur_.col);
    shift();

    doc.states.resize(doc.num_states);
    std::vector<bool> seen(doc.num_states, false);
    while (cur_.kind == TokKind::HeaderName && cur_.text == "State") {
      parse_state(doc, seen);
    }

    if (cur_.kind != TokKind::EndMarker)
      throw HoaSyntaxError("expected --END--", cur_.line, cur_.col);
    shift();
    if (cur_.kind != TokKind::Eof)
      throw HoaSyntaxError("trailing input after --END--", cur_.line, cur_.col);
    return doc;
  }

 private:
  void parse_acceptance(HoaDocument& doc, int hline, int hcol) {
    const long nsets = expect_int("acceptance set count");
    if (nsets != 1)
      throw HoaUnsupportedError("only Buchi acceptance (one Inf set) is supported", hline, hcol);
    // The only accepted expression shape is Inf(0).
    if (cur_.kind != TokKind::Ident || cur_.text != "Inf")
      throw HoaUnsupportedError("acceptance condition must be Inf(0)", cur_.line, cur_.col);
    shift();
    expect(TokKind::LParen, "(");
    const long set = expect_int("acceptance set index");
    if (set != 0)
      throw HoaUnsupportedError("acceptance condition must be Inf(0)", cur_.line, cur_.col);
    expect(TokKind::RParen, ")");
    if (cur_.kind == TokKind::And || cur_.kind == TokKind::Or)
      throw HoaUnsupportedError("compound acceptance conditions are not supported", cur_.line,
                                cur_.col);
    doc.acceptance = "1 Inf(0)";
  }

  void parse_state(HoaDocument& doc, std::vector<bool>& seen) {
    const int hline = cur_.line, hcol = cur_.col;
    shift();  // "State:"
    const long id = expect_int("state id");
    if (id < 0 || id >= doc.num_states)
      throw HoaSemanticError("state id " + std::to_string(id) + " out of range", hline, hcol);
    if (seen[id]) throw HoaSemanticError("duplicate State block " + std::to_string(id), hline, hcol);
    seen[id] = true;
    if (cur_.kind == TokKind::String) shift();  // optional state name, ignored
    if (cur_.kind == TokKind::LBrace)
      throw HoaUnsupportedError("state-based acceptance marks are not supported", cur_.line,
                                cur_.col);

    auto& state = doc.states[id];
    while (cur_.kind == TokKind::LBracket || cur_.kind == TokKind::Int) {
      if (cur_.kind == TokKind::Int)
        throw HoaUnsupportedError("implicit edge labels are not supported", cur_.line, cur_.col);
      shift();  // '['
      HoaTransition t;
      t.guard = parse_guard_or(doc);
      expect(TokKind::RBracket, "]");
      const int dline = cur_.line, dcol = cur_.col;
      t.target = static_cast<int>(expect_int("destination state"));
      if (t.target < 0 || t.target >= doc.num_states)
        throw HoaSemanticError("destination state " + std::to_string(t.target) + " out of range",
                               dline, dcol);
      if (cur_.kind == TokKind::And)
        throw HoaUnsupportedError("universal branching is not supported", cur_.line, cur_.col);
      if (cur_.kind == TokKind::LBrace) {
        shift();
        while (cur_.kind == TokKind::Int) {
          const long set = cur_.value;
          if (set != 0)
            throw HoaUnsupportedError("only acceptance set 0 is supported", cur_.line, cur_.col);
          t.acc_sets.push_back(static_cast<int>(set));
          shift();
        }
        expect(TokKind::RBrace, "}");
        std::sort(t.acc_sets.begin(), t.acc_sets.end());
        t.acc_sets.erase(std::unique(t.acc_sets.begin(), t.acc_sets.end()), t.acc_sets.end());
      }
      state.transitions.push_back(std::move(t));
    }
  }

  GuardPtr parse_guard_or(const HoaDocument& doc) {
    GuardPtr g = parse_guard_and(doc);
    while (cur_.kind == TokKind::Or) {
      shift();
      g = guard_or(std::move(g), parse_guard_and(doc));
    }
    return g;
  }

  GuardPtr parse_guard_and(const HoaDocument& doc) {
    GuardPtr g = parse_guard_not(doc);
    while (cur_.kind == TokKind::And) {
      shift();
      g = guard_and(std::move(g), parse_guard_not(doc));
    }
    return g;
  }

  GuardPtr parse_guard_not(const HoaDocument& doc) {
    if (cur_.kind == TokKind::Not) {
      shift();
      return guard_not(parse_guard_not(doc));
    }
    if (cur_.kind == TokKind::LParen) {
      shift();
      GuardPtr g = parse_guard_or(doc);
      expect(TokKind::RParen, ")");
      return g;
    }
    if (cur_.kind == TokKind::Int) {
      const long ap = cur_.value;
      if (ap >= doc.num_aps())
        throw HoaSemanticError("AP index " + std::to_string(ap) + " out of range", cur_.line,
                               cur_.col);
      shift();
      return guard_ap(static_cast<int>(ap));
    }
    if (cur_.kind == TokKind::Ident && cur_.text == "t") {
      shift();
      return guard_true();
    }
    if (cur_.kind == TokKind::Ident && cur_.text == "f") {
      shift();
      return guard_false();
    }
    throw HoaSyntaxError("expected label expression", cur_.line, cur_.col);
  }

  void expect_header(const std::string& name) {
    if (cur_.kind != TokKind::HeaderName || cur_.text != name)
      throw HoaSyntaxError("expected '" + name + ":'", cur_.line, cur_.col);
    shift();
  }

  long expect_int(const std::string& what) {
    if (cur_.kind != TokKind::Int)
      throw HoaSyntaxError("expected " + what, cur_.line, cur_.col);
    const long v = cur_.value;
    shift();
    return v;
  }

  void expect(TokKind kind, const std::string& what) {
    if (cur_.kind != kind) throw HoaSyntaxError("expected '" + what + "'", cur_.line, cur_.col);
    shift();
  }

  void shift() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

HoaDocument parse_hoa(std::string_view text) {
  return Parser(text).parse();
}

std::string serialize_hoa(const HoaDocument& doc) {
  std::ostringstream out;
  out << "HOA: v1\n";
  if (doc.name) out << "name: \"" << *doc.name << "\"\n";
  out << "States: " << doc.num_states << "\n";
  out << "Start: " << doc.start_state << "\n";
  out << "AP: " << doc.num_aps();
  for (const auto& ap : doc.ap_names) out << " \"" << ap << "\"";
  out << "\n";
  out << "Acceptance: " << doc.acceptance << "\n";
  out << "--BODY--\n";
  for (int s = 0; s < doc.num_states; ++s) {
    out << "State: " << s << "\n";
    for (const auto& t : doc.states[s].transitions) {
      out << "[" << guard_to_string(*t.guard) << "] " << t.target;
      if (!t.acc_sets.empty()) {
        out << " {";
        for (std::size_t i = 0; i < t.acc_sets.size(); ++i) {
          if (i) out << " ";
          out << t.acc_sets[i];
        }
        out << "}";
      }
      out << "\n";
    }
  }
  out << "--END--\n";
  return out.str();
}

}  // namespace marlshape::hoa
