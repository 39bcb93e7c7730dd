#include "gridcut/gridparse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "gridcut/error.hpp"

namespace gridcut {

namespace {

struct Matrix {
    int start_line = 0;
    std::vector<std::vector<double>> rows;
};

std::string_view strip_comment(std::string_view line) {
    auto pos = line.find('%');
    return pos == std::string_view::npos ? line : line.substr(0, pos);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_number(std::string_view token, int line, std::size_t column) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        // from_chars rejects a leading '+'; MATLAB accepts it.
        if (token.size() > 1 && token.front() == '+') {
            return parse_number(token.substr(1), line, column + 1);
        }
        throw ParseError("non-numeric token '" + std::string(token) + "' at column " +
                             std::to_string(column + 1),
                         line);
    }
    return value;
}

// If `line` opens `mpc.<name> = [`, returns the name and the remainder after '['.
std::optional<std::pair<std::string, std::string_view>> match_open(std::string_view line) {
    line = trim(line);
    constexpr std::string_view prefix = "mpc.";
    if (line.substr(0, prefix.size()) != prefix) {
        return std::nullopt;
    }
    std::size_t k = prefix.size();
    std::size_t name_begin = k;
    while (k < line.size() && (std::isalnum(static_cast<unsigned char>(line[k])) || line[k] == '_')) {
        ++k;
    }
    std::string name(line.substr(name_begin, k - name_begin));
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) {
        ++k;
    }
    if (k >= line.size() || line[k] != '=') {
        return std::nullopt;
    }
    ++k;
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) {
        ++k;
    }
    if (k >= line.size() || line[k] != '[') {
        return std::nullopt;
    }
    return std::make_pair(name, line.substr(k + 1));
}

class MatrixReader {
public:
    explicit MatrixReader(int start_line) { m_.start_line = start_line; }

    // Consumes one (comment-free) line of matrix body. Returns true once the
    // closing bracket has been seen.
    bool feed(std::string_view body, int line_no, std::size_t column_offset) {
        std::size_t k = 0;
        while (k < body.size()) {
            char c = body[k];
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                ++k;
                continue;
            }
            if (c == ';') {
                end_row();
                ++k;
                continue;
            }
            if (c == ']') {
                end_row();
                return true;
            }
            std::size_t begin = k;
            while (k < body.size() && !std::isspace(static_cast<unsigned char>(body[k])) &&
                   body[k] != ',' && body[k] != ';' && body[k] != ']') {
                ++k;
            }
            row_.push_back(parse_number(body.substr(begin, k - begin), line_no, column_offset + begin));
        }
        // A newline inside brackets also separates rows.
        end_row();
        return false;
    }

    Matrix take() { return std::move(m_); }

private:
    void end_row() {
        if (!row_.empty()) {
            m_.rows.push_back(std::move(row_));
            row_.clear();
        }
    }

    Matrix m_;
    std::vector<double> row_;
};

BusId to_bus_id(double v, int line) {
    if (std::floor(v) != v || !std::isfinite(v)) {
        throw ParseError("bus id " + std::to_string(v) + " is not an integer", line);
    }
    return static_cast<BusId>(v);
}

std::string case_name(std::string_view line) {
    // function mpc = case9
    line = trim(strip_comment(line));
    constexpr std::string_view kw = "function";
    if (line.substr(0, kw.size()) != kw) {
        return {};
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
        return {};
    }
    return std::string(trim(line.substr(eq + 1)));
}

}  // namespace

CaseData parse_matpower(std::string_view text) {
    std::optional<Matrix> bus;
    std::optional<Matrix> branch;
    CaseData data;

    std::optional<MatrixReader> reader;
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') {
            raw.remove_suffix(1);
        }
        std::string_view line = strip_comment(raw);

        if (!reader) {
            if (data.name.empty()) {
                data.name = case_name(raw);
            }
            auto open = match_open(line);
            if (!open) {
                continue;
            }
            current = open->first;
            reader.emplace(line_no);
            std::size_t offset = open->second.data() - line.data();
            if (!reader->feed(open->second, line_no, offset)) {
                continue;
            }
        } else if (!reader->feed(line, line_no, 0)) {
            continue;
        }

        // Block closed on this line.
        Matrix m = reader->take();
        reader.reset();
        if (current == "bus") {
            bus = std::move(m);
        } else if (current == "branch") {
            branch = std::move(m);
        }
    }
    if (reader) {
        throw ParseError("unterminated matrix block 'mpc." + current + "'", line_no);
    }
    if (!bus) {
        throw ParseError("missing 'mpc.bus = [' block", line_no);
    }
    if (!branch) {
        throw ParseError("missing 'mpc.branch = [' block", line_no);
    }

    std::set<BusId> known;
    for (const auto& row : bus->rows) {
        BusId id = to_bus_id(row.front(), bus->start_line);
        if (!known.insert(id).second) {
            throw SemanticError("duplicate bus id " + std::to_string(id));
        }
        data.bus_ids.push_back(id);
    }
    for (std::size_t k = 0; k < branch->rows.size(); ++k) {
        const auto& row = branch->rows[k];
        if (row.size() < 4) {
            throw ParseError("branch row " + std::to_string(k + 1) + " has fewer than 4 columns",
                             branch->start_line);
        }
        BranchRecord rec{to_bus_id(row[0], branch->start_line), to_bus_id(row[1], branch->start_line),
                         row[2], row[3]};
        if (!known.contains(rec.from_bus) || !known.contains(rec.to_bus)) {
            throw SemanticError("branch " + std::to_string(k + 1) + " references unknown bus (" +
                                std::to_string(rec.from_bus) + " -> " + std::to_string(rec.to_bus) + ")");
        }
        if (rec.from_bus == rec.to_bus) {
            throw SemanticError("branch " + std::to_string(k + 1) + " connects bus " +
                                std::to_string(rec.from_bus) + " to itself");
        }
        data.branches.push_back(rec);
    }
    return data;
}

CaseData load_matpower(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open case file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    CaseData data = parse_matpower(buf.str());
    if (data.name.empty()) {
        auto slash = path.find_last_of('/');
        std::string base = path.substr(slash == std::string::npos ? 0 : slash + 1);
        data.name = base.substr(0, base.find('.'));
    }
    return data;
}

double branch_weight(const BranchRecord& branch) {
    double z = std::hypot(branch.r, branch.x);
    if (!(z > 0.0)) {
        throw DomainError("branch " + std::to_string(branch.from_bus) + " -> " +
                          std::to_string(branch.to_bus) + " has zero impedance");
    }
    return 1.0 / z;
}

GridGraph case_to_graph(const CaseData& data) {
    GridGraph out;
    for (std::size_t k = 0; k < data.bus_ids.size(); ++k) {
        out.bus_index.emplace(data.bus_ids[k], static_cast<int>(k));
    }
    std::map<std::pair<int, int>, double> merged;
    for (const auto& br : data.branches) {
        auto from = out.bus_index.find(br.from_bus);
        auto to = out.bus_index.find(br.to_bus);
        if (from == out.bus_index.end() || to == out.bus_index.end()) {
            throw SemanticError("branch references unknown bus (" + std::to_string(br.from_bus) + " -> " +
                                std::to_string(br.to_bus) + ")");
        }
        int a = std::min(from->second, to->second);
        int b = std::max(from->second, to->second);
        merged[{a, b}] += branch_weight(br);
    }
    std::vector<Edge> edges;
    edges.reserve(merged.size());
    for (const auto& [key, w] : merged) {
        edges.push_back({key.first, key.second, w});
    }
    out.graph = WeightedGraph(static_cast<int>(data.bus_ids.size()), std::move(edges));
    return out;
}

}  // namespace gridcut
