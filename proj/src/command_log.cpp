#include "trident/command_log.hpp"

#include <istream>
#include <ostream>

#include "trident/codec.hpp"

namespace trident {

namespace {

constexpr std::string_view kLogMagic = "trident-market-log";
constexpr int kLogVersion = 1;

} // namespace

std::string entry_line(const LogEntry& e) {
    Json j{{"seq", e.seq},
           {"caller", e.command.caller},
           {"op", op_name(e.command.op)},
           {"args", operation_args(e.command.op)},
           {"event", e.event}};
    return j.dump();
}

LogEntry parse_entry_line(const std::string& line) {
    const Json j = Json::parse(line);
    LogEntry e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.command.caller = j.at("caller").get<std::string>();
    e.command.op = operation_from(j.at("op").get<std::string>(), j.at("args"));
    e.event = j.at("event").get<Event>();
    return e;
}

void write_log(std::ostream& out, const Market& market) {
    Json header{{"log", kLogMagic}, {"version", kLogVersion}, {"config", market.state().config}};
    out << header.dump() << '\n';
    for (const auto& e : market.log()) out << entry_line(e) << '\n';
}

CommandLog read_log(std::istream& in) {
    CommandLog log;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            if (!have_header) {
                const Json h = Json::parse(line);
                if (h.value("log", std::string{}) != kLogMagic) throw CodecError("missing log header");
                if (h.at("version").get<int>() != kLogVersion) throw CodecError("unsupported log version");
                log.config = h.at("config").get<MarketConfig>();
                have_header = true;
                continue;
            }
            log.entries.push_back(parse_entry_line(line));
        } catch (const LogFormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw LogFormatError(lineno, e.what());
        }
    }
    // A completely empty input is the log of an empty default market.
    return log;
}

Market replay_log(std::istream& in) {
    const CommandLog log = read_log(in);
    return Market::replay(log.config, log.entries);
}

} // namespace trident
