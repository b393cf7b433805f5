#include "apklab/simdevice.hpp"

#include <algorithm>
#include <charconv>

#include <json.hpp>
#include <zlib.h>

#include "apklab/errors.hpp"
#include "apklab/hashing.hpp"
#include "apklab/textutil.hpp"

namespace apklab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::int64_t kSystemPid = 52;    // ActivityManager and friends
constexpr std::int64_t kInstalldPid = 33;
constexpr std::int64_t kShellPid = 75;
constexpr std::int64_t kAdbdPid = 26;

std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& subst) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            std::size_t close = text.find('}', i);
            if (close != std::string::npos) {
                std::string inner = text.substr(i + 1, close - i - 1);
                std::string key = inner;
                bool url = false;
                if (std::size_t bar = inner.find('|'); bar != std::string::npos) {
                    key = inner.substr(0, bar);
                    url = inner.substr(bar + 1) == "url";
                }
                auto it = subst.find(key);
                if (it != subst.end()) {
                    out += url ? url_encode(it->second) : it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::uint16_t qtype_number(const std::string& qtype) {
    if (qtype == "A") return 1;
    if (qtype == "NS") return 2;
    if (qtype == "CNAME") return 5;
    if (qtype == "SOA") return 6;
    if (qtype == "PTR") return 12;
    if (qtype == "MX") return 15;
    if (qtype == "TXT") return 16;
    if (qtype == "AAAA") return 28;
    std::uint16_t n = 0;
    auto [p, ec] = std::from_chars(qtype.data(), qtype.data() + qtype.size(), n);
    if (ec == std::errc{} && p == qtype.data() + qtype.size()) return n;
    return 1;
}

bool is_dotted_address(const std::string& host) {
    try {
        wire::ipv4_address(host);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, p) : "0";
}

std::string pad_pid(std::int64_t pid) {
    std::string s = std::to_string(pid);
    while (s.size() < 5) s.insert(s.begin(), ' ');
    return s;
}

std::string http_reason(int status) {
    switch (status) {
        case 200: return "OK";
        case 201: return "Created";
        case 204: return "No Content";
        case 302: return "Found";
        case 403: return "Forbidden";
        case 404: return "Not Found";
        case 500: return "Internal Server Error";
        default: return "Status";
    }
}

std::string normalize_path(std::string p) {
    while (p.size() > 1 && p.back() == '/') p.pop_back();
    return p;
}

}  // namespace

const std::string& placeholder_png() {
    static const std::string png = [] {
        auto be32 = [](std::string& b, std::uint32_t v) {
            b.push_back(static_cast<char>(v >> 24));
            b.push_back(static_cast<char>((v >> 16) & 0xff));
            b.push_back(static_cast<char>((v >> 8) & 0xff));
            b.push_back(static_cast<char>(v & 0xff));
        };
        auto chunk = [&](const std::string& type, const std::string& data) {
            std::string c;
            be32(c, static_cast<std::uint32_t>(data.size()));
            c += type;
            c += data;
            be32(c, crc32_of(type + data));
            return c;
        };
        std::string ihdr;
        be32(ihdr, 1);  // width
        be32(ihdr, 1);  // height
        ihdr += '\x08';  // bit depth
        ihdr += '\x02';  // truecolor
        ihdr += '\x00';
        ihdr += '\x00';
        ihdr += '\x00';
        std::string raw(4, '\0');  // filter byte + one black RGB pixel
        uLongf len = compressBound(static_cast<uLong>(raw.size()));
        std::string idat(len, '\0');
        compress2(reinterpret_cast<Bytef*>(idat.data()), &len,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()), 9);
        idat.resize(len);
        std::string out("\x89PNG\r\n\x1a\n", 8);
        out += chunk("IHDR", ihdr);
        out += chunk("IDAT", idat);
        out += chunk("IEND", "");
        return out;
    }();
    return png;
}

SimulatedDevice::SimulatedDevice() = default;

void SimulatedDevice::require_live() const {
    if (!started_) throw DeviceError("no active session");
    if (!powered_) throw DeviceError("device is powered off");
}

std::uint32_t SimulatedDevice::wire_sec() const {
    return static_cast<std::uint32_t>(kCaptureEpoch + wire_ms_ / 1000);
}

std::uint32_t SimulatedDevice::wire_usec() const {
    return static_cast<std::uint32_t>((wire_ms_ % 1000) * 1000);
}

void SimulatedDevice::advance_wire(std::size_t packets) {
    wire_ms_ += static_cast<std::int64_t>(packets);
}

void SimulatedDevice::start(const fs::path& image_source, AnalysisRun& run) {
    if (started_) throw DeviceError("session already started");
    fs::path image_copy = run.result_dir / "image.fixture";
    try {
        fs::copy_file(image_source, image_copy, fs::copy_options::overwrite_existing);
    } catch (const fs::filesystem_error& e) {
        throw DeviceError(std::string("image copy failed: ") + e.what());
    }
    fixture_ = load_fixture(image_copy.string());
    run_ = &run;

    fs_.clear();
    for (const auto& b : fixture_.baseline_fs) {
        std::string path = normalize_path(b.path);
        // Parent directories are implied so manifests stay well-formed.
        std::string prefix;
        for (const std::string& part : split(path.substr(1), '/')) {
            prefix += "/" + part;
            if (prefix == path) break;
            if (!fs_.count(prefix)) fs_[prefix] = {"dir", "", "0755", ""};
        }
        fs_[path] = {b.kind, b.content, b.mode, b.target};
    }

    bundle_ = ArtifactBundle{};
    bundle_.pre_snapshot_path = run.result_dir / "pre.manifest";
    write_manifest(bundle_.pre_snapshot_path, manifest_from_model());

    started_ = true;
    powered_ = true;
    installed_ = false;
    collected_ = false;
    clock_ms_ = 0;
    wire_ms_ = 0;

    Subst subst{{"package", fixture_.package},
                {"phone", fixture_.device.phone_number},
                {"ip", fixture_.device.ip}};
    fire_effects(fixture_.boot, subst);
}

InstallResult SimulatedDevice::install_app(const SampleMeta& sample) {
    require_live();
    clock_ms_ += 1000;
    bool corrupt = fixture_.corrupt_install;
    append_syscall_line(kInstalldPid, "installd", "execve",
                        {std::string("/system/bin/pm"),
                         std::string("pm install /data/local/tmp/") + sample.filename},
                        corrupt ? -1 : 0);
    if (corrupt) {
        append_logcat("E", "PackageManager", kSystemPid,
                      "Parse error when installing " + sample.filename);
        return {false, "package parse failure"};
    }
    installed_ = true;
    append_logcat("I", "PackageManager", kSystemPid,
                  "Package " + fixture_.package + " installed");
    Subst subst{{"package", fixture_.package},
                {"phone", fixture_.device.phone_number},
                {"sample", sample.filename}};
    fire_effects(fixture_.install, subst);
    return {true, "installed " + fixture_.package};
}

ActionAck SimulatedDevice::apply_action(const DeviceAction& action) {
    require_live();
    if (auto bad = validate_action(action)) throw DeviceError(*bad);

    if (const Wait* w = std::get_if<Wait>(&action)) {
        clock_ms_ += w->millis;
    } else {
        clock_ms_ += 1000;
    }

    Subst subst{{"package", fixture_.package},
                {"phone", fixture_.device.phone_number},
                {"ip", fixture_.device.ip}};
    std::string trigger, package, from, text, command;

    struct Intrinsic {
        SimulatedDevice& d;
        Subst& subst;
        std::string& trigger;
        std::string& package;
        std::string& from;
        std::string& text;
        std::string& command;

        void operator()(const StartApp& a) {
            trigger = "app_start";
            package = a.package;
            subst["app.package"] = a.package;
            d.running_.insert(a.package);
            d.append_logcat("I", "ActivityManager", kSystemPid, "Start proc " + a.package);
        }
        void operator()(const StopApp& a) {
            trigger = "app_stop";
            package = a.package;
            subst["app.package"] = a.package;
            d.running_.erase(a.package);
            d.append_logcat("I", "ActivityManager", kSystemPid, "Killing " + a.package);
        }
        void operator()(const IncomingCall& a) {
            trigger = "call";
            from = a.number;
            subst["call.number"] = a.number;
            d.append_logcat("I", "Telephony", kSystemPid, "incoming call from '" + a.number + "'");
        }
        void operator()(const CancelCall& a) {
            trigger = "call_cancel";
            from = a.number;
            subst["call.number"] = a.number;
            d.append_logcat("I", "Telephony", kSystemPid, "call from '" + a.number + "' ended");
        }
        void operator()(const IncomingSms& a) {
            trigger = "sms";
            from = a.number;
            text = a.text;
            subst["sms.from"] = a.number;
            subst["sms.text"] = a.text;
            d.append_logcat("I", "Telephony", kSystemPid, "incoming sms from '" + a.number + "'");
        }
        void operator()(const SetGsmState& a) {
            trigger = "gsm";
            subst["gsm.state"] = std::string(to_string(a.state));
            d.append_logcat("I", "Telephony", kSystemPid,
                            "gsm voice state " + std::string(to_string(a.state)));
        }
        void operator()(const SetBatteryState& a) {
            trigger = "battery";
            subst["battery.status"] = std::string(to_string(a.status));
            subst["battery.capacity"] = std::to_string(a.capacity);
            d.append_logcat("I", "BatteryService", kSystemPid,
                            "status " + std::string(to_string(a.status)) + " level " +
                                std::to_string(a.capacity));
        }
        void operator()(const SetLocation& a) {
            trigger = "location";
            subst["lon"] = fmt_double(a.lon);
            subst["lat"] = fmt_double(a.lat);
            d.append_logcat("I", "LocationManager", kSystemPid,
                            "fix lon " + fmt_double(a.lon) + " lat " + fmt_double(a.lat));
        }
        void operator()(const MonkeyInput& a) {
            trigger = "monkey";
            subst["monkey.count"] = std::to_string(a.event_count);
            d.append_logcat("I", "Monkey", kSystemPid,
                            "injecting " + std::to_string(a.event_count) + " events");
        }
        void operator()(const UnlockScreen&) {
            trigger = "unlock";
            d.append_logcat("I", "Keyguard", kSystemPid, "screen unlocked");
        }
        void operator()(const LockScreen&) {
            trigger = "lock";
            d.append_logcat("I", "Keyguard", kSystemPid, "screen locked");
        }
        void operator()(const ShellCommand& a) {
            trigger = "shell";
            command = a.command;
            subst["shell.command"] = a.command;
            d.append_syscall_line(kShellPid, "sh", "execve",
                                  {std::string("/system/bin/sh"), "sh -c " + a.command}, 0);
        }
        void operator()(const AdbCommand& a) {
            trigger = "adb";
            command = a.command;
            subst["adb.command"] = a.command;
            d.append_logcat("I", "adbd", kAdbdPid, "exec '" + a.command + "'");
        }
        void operator()(const Screenshot& a) {
            trigger = "screenshot";
            subst["label"] = a.label;
            if (a.label.empty() || a.label.find('/') != std::string::npos ||
                a.label.find('\\') != std::string::npos ||
                a.label.find("..") != std::string::npos) {
                throw DeviceError("invalid screenshot label '" + a.label + "'");
            }
            fs::path file = d.run_->screenshots_dir() / (a.label + ".png");
            write_file(file.string(), placeholder_png());
            auto& paths = d.bundle_.screenshot_paths;
            if (std::find(paths.begin(), paths.end(), file) == paths.end()) {
                paths.push_back(file);
            }
        }
        void operator()(const Wait&) {}
    };
    std::visit(Intrinsic{*this, subst, trigger, package, from, text, command}, action);

    int fired = 0;
    if (installed_ && !trigger.empty()) {
        fire_matching_rules(trigger, subst, package, from, text, command, fired);
    }

    ActionAck ack;
    ack.clock_ms = clock_ms_;
    ack.note = describe_action(action);
    if (fired > 0) ack.note += " (" + std::to_string(fired) + " behaviors)";
    return ack;
}

void SimulatedDevice::fire_matching_rules(const std::string& trigger, const Subst& subst,
                                          const std::string& package, const std::string& from,
                                          const std::string& text, const std::string& command,
                                          int& fired) {
    for (const auto& rule : fixture_.rules) {
        if (rule.on != trigger) continue;
        if (trigger == "app_start" || trigger == "app_stop") {
            const std::string& want = rule.package ? *rule.package : fixture_.package;
            if (package != want) continue;
        }
        if (rule.from && *rule.from != from) continue;
        if (rule.text_contains && text.find(*rule.text_contains) == std::string::npos) continue;
        if (rule.command_contains &&
            command.find(*rule.command_contains) == std::string::npos) {
            continue;
        }
        fire_effects(rule.effects, subst);
        ++fired;
    }
}

void SimulatedDevice::fire_effects(const std::vector<FixtureEffect>& effects,
                                   const Subst& subst) {
    for (const auto& e : effects) {
        switch (e.kind) {
            case EffectKind::Http: emit_http(e, subst); break;
            case EffectKind::Dns: emit_dns_only(e, subst); break;
            case EffectKind::Icmp: emit_icmp(e, subst); break;
            case EffectKind::Syscall: append_syscall(e, subst); break;
            case EffectKind::Logcat:
                append_logcat(e.level, e.tag, fixture_.device.pid,
                              substitute(e.message, subst));
                break;
            default: apply_fs_effect(e, subst); break;
        }
    }
}

std::string SimulatedDevice::resolve_host(const std::string& host, const std::string& qtype) {
    if (is_dotted_address(host)) return host;
    std::string name = to_lower(host);
    std::string addr;
    if (auto it = fixture_.redirect.find(name); it != fixture_.redirect.end()) {
        addr = it->second;
    } else if (auto it2 = fixture_.hosts.find(name); it2 != fixture_.hosts.end()) {
        addr = it2->second;
    }

    if (wire_ms_ < clock_ms_) wire_ms_ = clock_ms_;
    std::uint16_t txid = next_txid_++;
    std::uint16_t sport = next_port_++;
    std::uint16_t qnum = qtype_number(qtype);
    std::uint32_t dev = wire::ipv4_address(fixture_.device.ip);
    std::uint32_t dns = wire::ipv4_address(fixture_.device.dns_server);

    std::string query = wire::encode_dns_query(txid, name, qnum);
    pcap_.add_packet(wire_sec(), wire_usec(),
                     wire::ethernet_frame(wire::ipv4_packet(
                         dev, dns, 17, wire::udp_datagram(dev, dns, sport, 53, query))));
    advance_wire(1);

    std::vector<wire::DnsAnswer> answers;
    if (!addr.empty() && qnum == 1) {
        answers.push_back({name, 1, 60, wire::a_rdata(addr)});
    }
    std::string response =
        wire::encode_dns_response(txid, name, qnum, answers, addr.empty());
    pcap_.add_packet(wire_sec(), wire_usec(),
                     wire::ethernet_frame(wire::ipv4_packet(
                         dns, dev, 17, wire::udp_datagram(dns, dev, 53, sport, response))));
    advance_wire(1);
    return addr;
}

void SimulatedDevice::emit_http(const FixtureEffect& e, const Subst& subst) {
    std::string host = substitute(e.host, subst);
    std::string path = substitute(e.path, subst);
    std::string body = substitute(e.body, subst);
    std::string method = to_upper(e.method);

    std::string addr = resolve_host(host, "A");
    if (addr.empty()) return;  // name did not resolve, no flow follows

    std::uint16_t port = e.port ? e.port : (method == "CONNECT" ? 8080 : 80);
    std::string target = method == "CONNECT" ? (path == "/" ? host + ":443" : path) : path;

    std::string req = method + " " + target + " HTTP/1.1\r\n";
    req += "Host: " + host + "\r\n";
    bool have_length = false;
    for (const auto& [k, v] : e.headers) {
        req += k + ": " + substitute(v, subst) + "\r\n";
        if (iequals(k, "content-length")) have_length = true;
    }
    if (!body.empty() && !have_length) {
        req += "Content-Length: " + std::to_string(body.size()) + "\r\n";
    }
    req += "\r\n";
    req += body;

    std::string resp = "HTTP/1.1 " + std::to_string(e.response_status) + " " +
                       http_reason(e.response_status) + "\r\n";
    resp += "Content-Length: " + std::to_string(e.response_body.size()) + "\r\n\r\n";
    resp += e.response_body;

    if (wire_ms_ < clock_ms_) wire_ms_ = clock_ms_;
    std::size_t before = pcap_.packet_count();
    wire::FlowBuilder flow(pcap_, wire::ipv4_address(fixture_.device.ip), next_port_++,
                           wire::ipv4_address(addr), port, wire_sec(), wire_usec());
    flow.handshake();
    flow.client_send(req);
    flow.server_send(resp);
    flow.close();
    advance_wire(pcap_.packet_count() - before);
}

void SimulatedDevice::emit_dns_only(const FixtureEffect& e, const Subst& subst) {
    resolve_host(substitute(e.host, subst), e.qtype);
}

void SimulatedDevice::emit_icmp(const FixtureEffect& e, const Subst& subst) {
    std::string addr = resolve_host(substitute(e.host, subst), "A");
    if (addr.empty()) return;
    if (wire_ms_ < clock_ms_) wire_ms_ = clock_ms_;
    std::uint32_t dev = wire::ipv4_address(fixture_.device.ip);
    std::uint32_t dst = wire::ipv4_address(addr);
    std::uint16_t ident = next_txid_++;
    pcap_.add_packet(wire_sec(), wire_usec(),
                     wire::ethernet_frame(wire::ipv4_packet(
                         dev, dst, 1, wire::icmp_echo(false, ident, 1, "abcdefgh"))));
    advance_wire(1);
    pcap_.add_packet(wire_sec(), wire_usec(),
                     wire::ethernet_frame(wire::ipv4_packet(
                         dst, dev, 1, wire::icmp_echo(true, ident, 1, "abcdefgh"))));
    advance_wire(1);
}

void SimulatedDevice::append_syscall(const FixtureEffect& e, const Subst& subst) {
    std::vector<std::variant<std::string, std::int64_t>> args;
    for (const auto& a : e.sys_args) {
        if (const std::string* s = std::get_if<std::string>(&a)) {
            args.emplace_back(substitute(*s, subst));
        } else {
            args.push_back(a);
        }
    }
    append_syscall_line(e.pid.value_or(fixture_.device.pid),
                        e.comm.value_or(fixture_.device.comm), e.syscall, args, e.ret);
}

void SimulatedDevice::append_syscall_line(
    std::int64_t pid, const std::string& comm, const std::string& name,
    const std::vector<std::variant<std::string, std::int64_t>>& args, std::int64_t ret) {
    json j;
    j["ts"] = clock_ms_ / 1000;
    j["pid"] = pid;
    j["comm"] = comm;
    j["syscall"] = name;
    json arr = json::array();
    for (const auto& a : args) {
        if (const std::string* s = std::get_if<std::string>(&a)) arr.push_back(*s);
        else arr.push_back(std::get<std::int64_t>(a));
    }
    j["args"] = arr;
    j["ret"] = ret;
    trace_lines_.push_back(j.dump());
}

void SimulatedDevice::append_logcat(const std::string& level, const std::string& tag,
                                    std::int64_t pid, const std::string& message) {
    logcat_lines_.push_back(level + "/" + tag + "(" + pad_pid(pid) + "): " + message);
}

void SimulatedDevice::apply_fs_effect(const FixtureEffect& e, const Subst& subst) {
    std::string path = normalize_path(substitute(e.fs_path, subst));
    if (path.empty() || path[0] != '/') return;

    auto ensure_parents = [&] {
        std::string prefix;
        for (const std::string& part : split(path.substr(1), '/')) {
            prefix += "/" + part;
            if (prefix == path) break;
            if (!fs_.count(prefix)) fs_[prefix] = {"dir", "", "0755", ""};
        }
    };

    switch (e.kind) {
        case EffectKind::FsCreate:
            ensure_parents();
            fs_[path] = {"file", substitute(e.content, subst), e.mode, ""};
            break;
        case EffectKind::FsWrite: {
            ensure_parents();
            auto it = fs_.find(path);
            if (it != fs_.end() && it->second.kind == "file") {
                it->second.content = substitute(e.content, subst);
            } else {
                fs_[path] = {"file", substitute(e.content, subst), e.mode, ""};
            }
            break;
        }
        case EffectKind::FsDelete: {
            fs_.erase(path);
            std::string prefix = path + "/";
            for (auto it = fs_.lower_bound(prefix);
                 it != fs_.end() && it->first.rfind(prefix, 0) == 0;) {
                it = fs_.erase(it);
            }
            break;
        }
        case EffectKind::FsChmod: {
            auto it = fs_.find(path);
            if (it != fs_.end()) it->second.mode = e.mode;
            break;
        }
        case EffectKind::FsMkdir:
            ensure_parents();
            if (!fs_.count(path)) fs_[path] = {"dir", "", e.mode, ""};
            break;
        default: break;
    }
}

SnapshotManifest SimulatedDevice::manifest_from_model() const {
    SnapshotManifest m;
    for (const auto& [path, node] : fs_) {
        ManifestEntry e;
        e.path = path;
        e.kind = node.kind;
        e.mode = node.mode;
        if (node.kind == "file") {
            e.size = node.content.size();
            e.sha256 = sha256_hex(node.content);
        }
        if (node.kind == "symlink") e.target = node.target;
        m.entries.push_back(std::move(e));
    }
    return m;
}

ArtifactBundle SimulatedDevice::collect_artifacts() {
    if (collected_) return bundle_;
    if (!started_) throw DeviceError("collect_artifacts before start");

    bundle_.pcap_path = run_->result_dir / "traffic.pcap";
    write_file(bundle_.pcap_path.string(), pcap_.bytes());

    bundle_.syscall_trace_path = run_->result_dir / "syscalls.jsonl";
    std::string trace;
    for (const auto& line : trace_lines_) {
        trace += line;
        trace.push_back('\n');
    }
    write_file(bundle_.syscall_trace_path.string(), trace);

    bundle_.logcat_path = run_->result_dir / "logcat.txt";
    std::string logcat;
    for (const auto& line : logcat_lines_) {
        logcat += line;
        logcat.push_back('\n');
    }
    write_file(bundle_.logcat_path.string(), logcat);

    powered_ = false;  // simulated power-off precedes the post snapshot
    bundle_.post_snapshot_path = run_->result_dir / "post.manifest";
    write_manifest(bundle_.post_snapshot_path, manifest_from_model());

    collected_ = true;
    return bundle_;
}

void SimulatedDevice::stop() {
    powered_ = false;
    started_ = false;
}

}  // namespace apklab
