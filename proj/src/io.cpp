#include "hmmbw/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "hmmbw/error.hpp"

namespace hmmbw::io {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

void render_vector(std::ostream& os, std::span<const double> v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_real(v[i]);
  os << ']';
}

void render_matrix(std::ostream& os, const Matrix& m, const char* indent) {
  os << "[\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    os << indent << "  ";
    render_vector(os, m.row(r));
    os << (r + 1 < m.rows() ? ",\n" : "\n");
  }
  os << indent << ']';
}

const json& field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw IoError("missing field '" + where + name + "'");
  return *it;
}

std::vector<double> real_array(const json& j, const std::string& name) {
  if (!j.is_array()) throw IoError("field '" + name + "': expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw IoError("field '" + name + "[" + std::to_string(i) + "]': expected a number");
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

Matrix real_matrix(const json& j, const std::string& name) {
  if (!j.is_array()) throw IoError("field '" + name + "': expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < j.size(); ++r) {
    rows.push_back(real_array(j[r], name + "[" + std::to_string(r) + "]"));
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const ValidationError& e) {
    throw IoError("field '" + name + "': " + e.what());
  }
}

std::size_t positive_integer(const json& j, const std::string& name) {
  if (!j.is_number_integer() || j.get<long long>() < 1) {
    throw IoError("field '" + name + "': expected a positive integer");
  }
  return j.get<std::size_t>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw IoError("unknown field '" + where + key + "'");
  }
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  auto is_sep = [](char c) { return c == ',' || std::isspace(static_cast<unsigned char>(c)); };
  while (pos < line.size()) {
    while (pos < line.size() && is_sep(line[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !is_sep(line[pos])) ++pos;
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string render_model(const HmmParameters& params) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"schema_version\": " << kSchemaVersion << ",\n";
  os << "  \"n_states\": " << params.n_states() << ",\n";
  os << "  \"emission\": {\n";
  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    os << "    \"kind\": \"categorical\",\n";
    os << "    \"n_symbols\": " << cat->n_symbols() << ",\n";
    os << "    \"probs\": ";
    render_matrix(os, cat->probs, "    ");
    os << "\n";
  } else {
    const auto& g = std::get<GaussianEmission>(params.emission);
    os << "    \"kind\": \"gaussian\",\n";
    os << "    \"means\": ";
    render_vector(os, g.means);
    os << ",\n    \"variances\": ";
    render_vector(os, g.variances);
    os << "\n";
  }
  os << "  },\n";
  os << "  \"pi\": ";
  render_vector(os, params.pi.probs);
  os << ",\n  \"trans\": ";
  render_matrix(os, params.trans.probs, "  ");
  os << "\n}\n";
  return os.str();
}

HmmParameters parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("model parse error: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("model document must be a JSON object");

  const json& version = field(doc, "schema_version", "");
  if (!version.is_number_integer()) throw IoError("field 'schema_version': expected an integer");
  if (version.get<long long>() != kSchemaVersion) {
    throw IoError("unsupported schema_version " + version.dump() + " (supported: " +
                  std::to_string(kSchemaVersion) + ")");
  }
  check_keys(doc, {"schema_version", "n_states", "emission", "pi", "trans"}, "");

  const std::size_t n = positive_integer(field(doc, "n_states", ""), "n_states");

  HmmParameters params;
  params.pi.probs = real_array(field(doc, "pi", ""), "pi");
  params.trans.probs = real_matrix(field(doc, "trans", ""), "trans");

  const json& em = field(doc, "emission", "");
  if (!em.is_object()) throw IoError("field 'emission': expected an object");
  const json& kind = field(em, "kind", "emission.");
  if (kind == "categorical") {
    check_keys(em, {"kind", "n_symbols", "probs"}, "emission.");
    const std::size_t m = positive_integer(field(em, "n_symbols", "emission."), "emission.n_symbols");
    CategoricalEmission cat{real_matrix(field(em, "probs", "emission."), "emission.probs")};
    if (cat.probs.rows() > 0 && cat.n_symbols() != m) {
      throw ValidationError("emission.probs has " + std::to_string(cat.n_symbols()) +
                            " columns but n_symbols is " + std::to_string(m));
    }
    params.emission = std::move(cat);
  } else if (kind == "gaussian") {
    check_keys(em, {"kind", "means", "variances"}, "emission.");
    params.emission = GaussianEmission{real_array(field(em, "means", "emission."), "emission.means"),
                                       real_array(field(em, "variances", "emission."),
                                                  "emission.variances")};
  } else {
    throw IoError("field 'emission.kind': expected \"categorical\" or \"gaussian\", got " +
                  kind.dump());
  }

  if (params.n_states() != n) {
    throw ValidationError("pi has " + std::to_string(params.n_states()) +
                          " entries but n_states is " + std::to_string(n));
  }
  validate(params);
  return params;
}

HmmParameters load_model(const std::filesystem::path& path) {
  try {
    return parse_model(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_model(const HmmParameters& params, const std::filesystem::path& path) {
  write_file(path, render_model(params));
}

std::string render_sequences(const std::vector<ObservationSequence>& sequences) {
  std::ostringstream os;
  for (const auto& seq : sequences) {
    if (seq.kind() == EmissionKind::categorical) {
      const auto& s = seq.symbols();
      for (std::size_t t = 0; t < s.size(); ++t) os << (t ? " " : "") << s[t];
    } else {
      const auto& v = seq.values();
      for (std::size_t t = 0; t < v.size(); ++t) os << (t ? " " : "") << format_real(v[t]);
    }
    os << '\n';
  }
  return os.str();
}

std::vector<ObservationSequence> parse_sequences(std::string_view text, EmissionKind kind) {
  std::vector<ObservationSequence> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;

    auto where = [&](std::size_t i) {
      return "line " + std::to_string(line_no) + ", token " + std::to_string(i + 1);
    };
    if (kind == EmissionKind::categorical) {
      std::vector<int> symbols;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        int v = 0;
        const auto tok = tokens[i];
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
          throw IoError(where(i) + ": '" + std::string(tok) +
                        "' is not a non-negative integer symbol");
        }
        symbols.push_back(v);
      }
      out.push_back(ObservationSequence::categorical(std::move(symbols)));
    } else {
      std::vector<double> values;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        double v = 0.0;
        const auto tok = tokens[i];
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
          throw IoError(where(i) + ": '" + std::string(tok) + "' is not a finite real number");
        }
        values.push_back(v);
      }
      out.push_back(ObservationSequence::gaussian(std::move(values)));
    }
  }
  if (out.empty()) throw IoError("no sequences: input is empty after removing comments");
  return out;
}

std::vector<ObservationSequence> load_sequences(const std::filesystem::path& path,
                                                EmissionKind kind) {
  try {
    return parse_sequences(read_file(path), kind);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_sequences(const std::vector<ObservationSequence>& sequences,
                    const std::filesystem::path& path) {
  write_file(path, render_sequences(sequences));
}

void write_fit_report_line(std::ostream& out, std::size_t iteration, double log_likelihood,
                           std::optional<double> previous) {
  out << iteration << ' ' << format_real(log_likelihood) << ' ';
  if (previous) {
    out << format_real(std::abs(log_likelihood - *previous) / (1.0 + std::abs(*previous)));
  } else {
    out << "nan";
  }
  out << '\n';
}

void write_fit_report(std::ostream& out, const FitResult& result) {
  out << "# iteration log_likelihood rel_change\n";
  const auto& trace = result.log_likelihood_trace;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    write_fit_report_line(out, i + 1, trace[i],
                          i == 0 ? std::nullopt : std::optional<double>(trace[i - 1]));
  }
  out << "converged " << (result.converged ? "true" : "false") << '\n';
  out << "iterations " << result.iterations << '\n';
}

}  // namespace hmmbw::io
