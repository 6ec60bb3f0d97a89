#include "sieve/sql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace sieve {

namespace {

enum class TokKind { Ident, Number, String, Symbol, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;   // identifiers upper-cased separately for keywords
  std::string upper;
};

class Lexer {
 public:
  explicit Lexer(const std::string& sql) : sql_(sql) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  bool accept_keyword(std::string_view kw) {
    if (tok_.kind == TokKind::Ident && tok_.upper == kw) {
      advance();
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw))
      throw ParseError("expected " + std::string(kw) + " near '" + tok_.text +
                       "'");
  }

  bool accept_symbol(std::string_view sym) {
    if (tok_.kind == TokKind::Symbol && tok_.text == sym) {
      advance();
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym))
      throw ParseError("expected '" + std::string(sym) + "' near '" +
                       tok_.text + "'");
  }

 private:
  void advance() {
    while (pos_ < sql_.size() &&
           std::isspace(static_cast<unsigned char>(sql_[pos_])))
      ++pos_;
    tok_ = Token{};
    if (pos_ >= sql_.size()) {
      tok_.kind = TokKind::End;
      return;
    }
    char c = sql_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < sql_.size() &&
             (std::isalnum(static_cast<unsigned char>(sql_[pos_])) ||
              sql_[pos_] == '_'))
        ++pos_;
      tok_.kind = TokKind::Ident;
      tok_.text = sql_.substr(start, pos_ - start);
      tok_.upper = tok_.text;
      std::transform(tok_.upper.begin(), tok_.upper.end(), tok_.upper.begin(),
                     [](unsigned char ch) { return std::toupper(ch); });
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < sql_.size() &&
         std::isdigit(static_cast<unsigned char>(sql_[pos_ + 1])))) {
      size_t start = pos_;
      ++pos_;
      while (pos_ < sql_.size() &&
             (std::isdigit(static_cast<unsigned char>(sql_[pos_])) ||
              sql_[pos_] == '.'))
        ++pos_;
      tok_.kind = TokKind::Number;
      tok_.text = sql_.substr(start, pos_ - start);
      return;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      size_t start = ++pos_;
      while (pos_ < sql_.size() && sql_[pos_] != quote) ++pos_;
      if (pos_ >= sql_.size()) throw ParseError("unterminated string literal");
      tok_.kind = TokKind::String;
      tok_.text = sql_.substr(start, pos_ - start);
      ++pos_;
      return;
    }
    static const char* two_char[] = {">=", "<=", "!=", "<>"};
    for (const char* sym : two_char) {
      if (sql_.compare(pos_, 2, sym) == 0) {
        tok_.kind = TokKind::Symbol;
        tok_.text = sym;
        pos_ += 2;
        return;
      }
    }
    tok_.kind = TokKind::Symbol;
    tok_.text = std::string(1, c);
    ++pos_;
  }

  const std::string& sql_;
  size_t pos_ = 0;
  Token tok_;
};

bool looks_like_date(const std::string& s) {
  return s.size() == 10 && s[4] == '-' && s[7] == '-' &&
         std::isdigit(static_cast<unsigned char>(s[0]));
}

bool looks_like_time(const std::string& s) {
  return (s.size() == 5 || s.size() == 8) && s[2] == ':' &&
         std::isdigit(static_cast<unsigned char>(s[0]));
}

bool looks_like_timestamp(const std::string& s) {
  return s.size() == 19 && s[10] == ' ' && looks_like_date(s.substr(0, 10));
}

Value number_literal(const std::string& text) {
  if (text.find('.') != std::string::npos) return Value::decimal(std::stod(text));
  int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw ParseError("bad numeric literal '" + text + "'");
  return Value::integer(v);
}

}  // namespace

Value parse_literal_text(const std::string& text) {
  if (looks_like_timestamp(text)) return Value::parse_timestamp(text);
  if (looks_like_date(text)) return Value::parse_date(text);
  if (looks_like_time(text)) return Value::parse_time(text);
  return Value::text(text);
}

namespace {

Value parse_literal(Lexer& lex) {
  Token t = lex.take();
  if (t.kind == TokKind::Number) return number_literal(t.text);
  if (t.kind == TokKind::String) return parse_literal_text(t.text);
  throw ParseError("expected literal near '" + t.text + "'");
}

ColumnRef parse_column_ref(Lexer& lex) {
  Token t = lex.take();
  if (t.kind != TokKind::Ident)
    throw ParseError("expected column near '" + t.text + "'");
  ColumnRef ref;
  if (lex.accept_symbol(".")) {
    ref.alias = t.text;
    Token attr = lex.take();
    if (attr.kind != TokKind::Ident)
      throw ParseError("expected attribute after '" + t.text + ".'");
    ref.attr = attr.text;
  } else {
    ref.attr = t.text;
  }
  return ref;
}

void parse_where_conjunct(Lexer& lex, ParsedQuery& q) {
  ColumnRef col = parse_column_ref(lex);

  if (lex.accept_keyword("BETWEEN")) {
    Value lo = parse_literal(lex);
    lex.expect_keyword("AND");
    Value hi = parse_literal(lex);
    q.predicates.push_back(
        {col, RangePredicate{CompareOp::Ge, std::move(lo), CompareOp::Le,
                             std::move(hi)}});
    return;
  }
  if (lex.accept_keyword("NOT")) {
    lex.expect_keyword("IN");
    lex.expect_symbol("(");
    ListPredicate list{true, {}};
    do {
      list.values.push_back(parse_literal(lex));
    } while (lex.accept_symbol(","));
    lex.expect_symbol(")");
    q.predicates.push_back({col, std::move(list)});
    return;
  }
  if (lex.accept_keyword("IN")) {
    lex.expect_symbol("(");
    ListPredicate list{false, {}};
    do {
      list.values.push_back(parse_literal(lex));
    } while (lex.accept_symbol(","));
    lex.expect_symbol(")");
    q.predicates.push_back({col, std::move(list)});
    return;
  }

  Token op = lex.take();
  if (op.kind != TokKind::Symbol)
    throw ParseError("expected comparison operator near '" + op.text + "'");
  CompareOp cop = op_from_sql(op.text);

  if (lex.peek().kind == TokKind::Ident) {
    if (cop != CompareOp::Eq)
      throw ParseError("only equi-joins are supported");
    ColumnRef rhs = parse_column_ref(lex);
    q.joins.push_back({col, rhs});
    return;
  }
  Value v = parse_literal(lex);
  q.predicates.push_back({col, ScalarPredicate{cop, std::move(v)}});
}

SelectItem parse_select_item(Lexer& lex) {
  if (lex.accept_keyword("COUNT")) {
    lex.expect_symbol("(");
    SelectItem item;
    if (lex.accept_symbol("*")) {
      item.agg = AggKind::CountStar;
    } else if (lex.accept_keyword("DISTINCT")) {
      item.agg = AggKind::CountDistinct;
      item.col = parse_column_ref(lex);
    } else {
      item.agg = AggKind::Count;
      item.col = parse_column_ref(lex);
    }
    lex.expect_symbol(")");
    return item;
  }
  SelectItem item;
  item.agg = AggKind::Column;
  item.col = parse_column_ref(lex);
  return item;
}

}  // namespace

ParsedQuery parse_query(const std::string& sql) {
  Lexer lex(sql);
  ParsedQuery q;
  lex.expect_keyword("SELECT");
  if (lex.accept_symbol("*")) {
    q.select_star = true;
  } else {
    do {
      q.select.push_back(parse_select_item(lex));
    } while (lex.accept_symbol(","));
  }
  lex.expect_keyword("FROM");
  do {
    Token rel = lex.take();
    if (rel.kind != TokKind::Ident)
      throw ParseError("expected relation near '" + rel.text + "'");
    FromEntry entry;
    entry.relation = rel.text;
    lex.accept_keyword("AS");
    if (lex.peek().kind == TokKind::Ident &&
        lex.peek().upper != "WHERE" && lex.peek().upper != "GROUP") {
      entry.alias = lex.take().text;
    } else {
      entry.alias = entry.relation;
    }
    q.from.push_back(std::move(entry));
  } while (lex.accept_symbol(","));

  if (lex.accept_keyword("WHERE")) {
    do {
      parse_where_conjunct(lex, q);
    } while (lex.accept_keyword("AND"));
  }
  if (lex.accept_keyword("GROUP")) {
    lex.expect_keyword("BY");
    do {
      q.group_by.push_back(parse_column_ref(lex));
    } while (lex.accept_symbol(","));
  }
  if (lex.peek().kind != TokKind::End) {
    if (lex.peek().kind == TokKind::Symbol && lex.peek().text == ";") {
      lex.take();
      if (lex.peek().kind == TokKind::End) return q;
    }
    throw ParseError("unexpected trailing input near '" + lex.peek().text +
                     "'");
  }
  if (q.from.empty()) throw ParseError("query needs a FROM clause");
  return q;
}

const FromEntry* ParsedQuery::find_alias(const std::string& alias) const {
  for (const auto& f : from)
    if (f.alias == alias) return &f;
  return nullptr;
}

std::string ParsedQuery::to_sql(
    const std::map<std::string, std::string>& relation_subst) const {
  std::string out = "SELECT ";
  if (select_star) {
    out += "*";
  } else {
    for (size_t i = 0; i < select.size(); ++i) {
      if (i) out += ", ";
      const SelectItem& item = select[i];
      switch (item.agg) {
        case AggKind::Column:
          out += item.col.to_string();
          break;
        case AggKind::CountStar:
          out += "COUNT(*)";
          break;
        case AggKind::Count:
          out += "COUNT(" + item.col.to_string() + ")";
          break;
        case AggKind::CountDistinct:
          out += "COUNT(DISTINCT " + item.col.to_string() + ")";
          break;
      }
    }
  }
  out += " FROM ";
  for (size_t i = 0; i < from.size(); ++i) {
    if (i) out += ", ";
    auto it = relation_subst.find(from[i].relation);
    const std::string& rel =
        it == relation_subst.end() ? from[i].relation : it->second;
    out += rel;
    if (from[i].alias != rel) out += " AS " + from[i].alias;
  }
  bool first = true;
  auto conj = [&]() -> std::string {
    if (first) {
      first = false;
      return " WHERE ";
    }
    return " AND ";
  };
  for (const auto& p : predicates) {
    ObjectCondition oc{p.col.attr, p.pred};
    out += conj() + oc.to_sql(p.col.alias);
  }
  for (const auto& j : joins)
    out += conj() + j.left.to_string() + " = " + j.right.to_string();
  if (!group_by.empty()) {
    out += " GROUP BY ";
    for (size_t i = 0; i < group_by.size(); ++i) {
      if (i) out += ", ";
      out += group_by[i].to_string();
    }
  }
  return out;
}

namespace {

struct BoundColumn {
  size_t from_idx;
  std::string attr;
};

// Resolve alias-or-bare column references against the FROM list.
BoundColumn bind_column(const ParsedQuery& q, const Database& db,
                        const ColumnRef& ref) {
  if (!ref.alias.empty()) {
    for (size_t i = 0; i < q.from.size(); ++i)
      if (q.from[i].alias == ref.alias) return {i, ref.attr};
    throw ParseError("unknown alias '" + ref.alias + "'");
  }
  std::optional<size_t> found;
  for (size_t i = 0; i < q.from.size(); ++i) {
    const Relation& rel = db.relation(q.from[i].relation);
    if (!rel.has_attribute(ref.attr)) continue;
    if (found && q.from[*found].relation != q.from[i].relation)
      throw ParseError("ambiguous column '" + ref.attr + "'");
    if (!found) found = i;
  }
  if (!found) throw ParseError("unknown column '" + ref.attr + "'");
  return {*found, ref.attr};
}

}  // namespace

std::multiset<std::string> QueryResult::fingerprint() const {
  std::multiset<std::string> out;
  for (const auto& row : rows) {
    std::string line;
    for (const auto& v : row) {
      line += v.to_string();
      line += '\x1f';
    }
    out.insert(std::move(line));
  }
  return out;
}

QueryResult execute_query(const Database& db, const ParsedQuery& q,
                          const std::map<std::string, std::set<size_t>>&
                              allowed_ids,
                          ExecCounters& counters) {
  const size_t n_from = q.from.size();

  // Per-alias candidate rows after single-alias predicates.
  std::vector<std::vector<size_t>> candidates(n_from);
  for (size_t i = 0; i < n_from; ++i) {
    const Relation& rel = db.relation(q.from[i].relation);
    auto allowed = allowed_ids.find(q.from[i].relation);
    if (allowed != allowed_ids.end()) {
      candidates[i].assign(allowed->second.begin(), allowed->second.end());
    } else {
      candidates[i].resize(rel.row_count());
      for (size_t id = 0; id < rel.row_count(); ++id) candidates[i][id] = id;
    }
  }

  std::vector<std::vector<std::pair<std::string, const Predicate*>>>
      alias_preds(n_from);
  for (const auto& p : q.predicates) {
    BoundColumn bc = bind_column(q, db, p.col);
    alias_preds[bc.from_idx].push_back({bc.attr, &p.pred});
  }
  for (size_t i = 0; i < n_from; ++i) {
    if (alias_preds[i].empty()) continue;
    const Relation& rel = db.relation(q.from[i].relation);
    std::vector<size_t> kept;
    for (size_t id : candidates[i]) {
      bool pass = true;
      for (const auto& [attr, pred] : alias_preds[i]) {
        ++counters.predicate_evals;
        const Value* v = rel.row(id).find(attr);
        if (v == nullptr || !eval_predicate(*pred, *v)) {
          pass = false;
          break;
        }
      }
      if (pass) kept.push_back(id);
    }
    candidates[i] = std::move(kept);
  }

  // Left-deep hash equi-joins in FROM order; aliases without a join
  // predicate against the joined prefix become a cross product.
  struct JoinedRow {
    std::vector<size_t> ids;  // per FROM entry, size grows as we join
  };
  std::vector<JoinedRow> joined;
  joined.reserve(candidates[0].size());
  for (size_t id : candidates[0]) joined.push_back({{id}});

  struct BoundJoin {
    BoundColumn left, right;
  };
  std::vector<BoundJoin> bound_joins;
  for (const auto& j : q.joins)
    bound_joins.push_back({bind_column(q, db, j.left),
                           bind_column(q, db, j.right)});

  for (size_t next = 1; next < n_from; ++next) {
    const Relation& rel = db.relation(q.from[next].relation);
    // Join predicates connecting `next` to the joined prefix.
    std::vector<std::pair<BoundColumn, BoundColumn>> links;  // (prefix, next)
    for (const auto& bj : bound_joins) {
      if (bj.left.from_idx < next && bj.right.from_idx == next)
        links.push_back({bj.left, bj.right});
      else if (bj.right.from_idx < next && bj.left.from_idx == next)
        links.push_back({bj.right, bj.left});
    }
    std::vector<JoinedRow> out;
    if (links.empty()) {
      for (const auto& jr : joined)
        for (size_t id : candidates[next]) {
          JoinedRow nr = jr;
          nr.ids.push_back(id);
          out.push_back(std::move(nr));
        }
    } else {
      // Hash on the first link; verify the rest.
      std::map<Value, std::vector<size_t>, ValueLess> hash;
      for (size_t id : candidates[next]) {
        const Value* v = rel.row(id).find(links[0].second.attr);
        if (v != nullptr) hash[*v].push_back(id);
      }
      for (const auto& jr : joined) {
        const Relation& lrel =
            db.relation(q.from[links[0].first.from_idx].relation);
        const Value* lv =
            lrel.row(jr.ids[links[0].first.from_idx]).find(links[0].first.attr);
        if (lv == nullptr) continue;
        auto bucket = hash.find(*lv);
        if (bucket == hash.end()) continue;
        for (size_t id : bucket->second) {
          bool pass = true;
          for (size_t li = 1; li < links.size() && pass; ++li) {
            const Relation& plrel =
                db.relation(q.from[links[li].first.from_idx].relation);
            const Value* pv = plrel.row(jr.ids[links[li].first.from_idx])
                                  .find(links[li].first.attr);
            const Value* nv = rel.row(id).find(links[li].second.attr);
            ++counters.predicate_evals;
            pass = pv != nullptr && nv != nullptr && pv->equals(*nv);
          }
          if (!pass) continue;
          JoinedRow nr = jr;
          nr.ids.push_back(id);
          out.push_back(std::move(nr));
        }
      }
    }
    joined = std::move(out);
  }

  auto column_value = [&](const JoinedRow& jr, const BoundColumn& bc) -> Value {
    const Relation& rel = db.relation(q.from[bc.from_idx].relation);
    const Value* v = rel.row(jr.ids[bc.from_idx]).find(bc.attr);
    if (v == nullptr)
      throw ParseError("row missing attribute '" + bc.attr + "'");
    return *v;
  };

  QueryResult result;

  // Aggregation path.
  bool has_agg = std::any_of(q.select.begin(), q.select.end(),
                             [](const SelectItem& s) {
                               return s.agg != AggKind::Column;
                             });
  if (has_agg || !q.group_by.empty()) {
    std::vector<BoundColumn> group_cols;
    for (const auto& g : q.group_by) group_cols.push_back(bind_column(q, db, g));
    struct GroupState {
      std::vector<Value> key;
      int64_t count = 0;
      std::map<std::string, std::set<std::string>> distinct;  // per select idx
      std::map<std::string, int64_t> non_null;
    };
    std::map<std::string, GroupState> groups;
    for (const auto& jr : joined) {
      std::string key;
      std::vector<Value> key_vals;
      for (const auto& gc : group_cols) {
        Value v = column_value(jr, gc);
        key += v.to_string();
        key += '\x1f';
        key_vals.push_back(std::move(v));
      }
      auto& g = groups[key];
      if (g.key.empty()) g.key = key_vals;
      ++g.count;
      for (size_t si = 0; si < q.select.size(); ++si) {
        const SelectItem& item = q.select[si];
        if (item.agg == AggKind::Count || item.agg == AggKind::CountDistinct) {
          BoundColumn bc = bind_column(q, db, item.col);
          const Relation& rel = db.relation(q.from[bc.from_idx].relation);
          const Value* v = rel.row(jr.ids[bc.from_idx]).find(bc.attr);
          if (v == nullptr) continue;
          std::string si_key = std::to_string(si);
          if (item.agg == AggKind::CountDistinct)
            g.distinct[si_key].insert(v->to_string());
          else
            ++g.non_null[si_key];
        }
      }
    }
    for (const auto& item : q.select) {
      switch (item.agg) {
        case AggKind::Column:
          result.columns.push_back(item.col.to_string());
          break;
        case AggKind::CountStar:
          result.columns.push_back("COUNT(*)");
          break;
        case AggKind::Count:
          result.columns.push_back("COUNT(" + item.col.to_string() + ")");
          break;
        case AggKind::CountDistinct:
          result.columns.push_back("COUNT(DISTINCT " + item.col.to_string() +
                                   ")");
          break;
      }
    }
    for (const auto& [key, g] : groups) {
      std::vector<Value> row;
      for (size_t si = 0; si < q.select.size(); ++si) {
        const SelectItem& item = q.select[si];
        std::string si_key = std::to_string(si);
        switch (item.agg) {
          case AggKind::Column: {
            // Must be a group-by column; take it from the group key.
            bool found = false;
            for (size_t gi = 0; gi < q.group_by.size(); ++gi) {
              if (q.group_by[gi] == item.col) {
                row.push_back(g.key[gi]);
                found = true;
                break;
              }
            }
            if (!found)
              throw ParseError("select column '" + item.col.to_string() +
                               "' is not in GROUP BY");
            break;
          }
          case AggKind::CountStar:
            row.push_back(Value::integer(g.count));
            break;
          case AggKind::Count: {
            auto it = g.non_null.find(si_key);
            row.push_back(
                Value::integer(it == g.non_null.end() ? 0 : it->second));
            break;
          }
          case AggKind::CountDistinct: {
            auto it = g.distinct.find(si_key);
            row.push_back(Value::integer(
                it == g.distinct.end()
                    ? 0
                    : static_cast<int64_t>(it->second.size())));
            break;
          }
        }
      }
      result.rows.push_back(std::move(row));
    }
    return result;
  }

  // Plain projection.
  if (q.select_star) {
    for (size_t i = 0; i < n_from; ++i) {
      const Relation& rel = db.relation(q.from[i].relation);
      for (const auto& [attr, _] : rel.schema())
        result.columns.push_back(q.from[i].alias + "." + attr);
    }
    for (const auto& jr : joined) {
      std::vector<Value> row;
      for (size_t i = 0; i < n_from; ++i) {
        const Relation& rel = db.relation(q.from[i].relation);
        for (const auto& [attr, _] : rel.schema()) {
          const Value* v = rel.row(jr.ids[i]).find(attr);
          row.push_back(v != nullptr ? *v : Value::text(""));
        }
      }
      result.rows.push_back(std::move(row));
    }
    return result;
  }

  std::vector<BoundColumn> bound_select;
  for (const auto& item : q.select) {
    bound_select.push_back(bind_column(q, db, item.col));
    result.columns.push_back(item.col.to_string());
  }
  for (const auto& jr : joined) {
    std::vector<Value> row;
    for (const auto& bc : bound_select) row.push_back(column_value(jr, bc));
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace sieve
