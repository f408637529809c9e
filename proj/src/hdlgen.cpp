#include "seqsvm/hdlgen.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace seqsvm {

namespace {

std::string ulit(int width, std::int64_t value)
{
    if (value < 0 || (width < 63 && value >= (std::int64_t{1} << width)))
        throw HdlError("literal " + std::to_string(value) + " does not fit " + std::to_string(width) +
                       " unsigned bits");
    return std::to_string(width) + "'d" + std::to_string(value);
}

std::string slit(int width, std::int64_t value)
{
    if (!fits_signed(value, width))
        throw HdlError("literal " + std::to_string(value) + " does not fit " + std::to_string(width) +
                       " signed bits");
    const std::string body = std::to_string(width) + "'sd" + std::to_string(value < 0 ? -value : value);
    return value < 0 ? "-" + body : body;
}

std::string banner_lines(const std::string& banner)
{
    if (banner.empty())
        return {};
    std::ostringstream os;
    std::istringstream in(banner);
    std::string line;
    while (std::getline(in, line))
        os << "// " << line << '\n';
    return os.str();
}

int class_width(int n_classes)
{
    return std::max(1, ceil_log2(static_cast<std::uint64_t>(n_classes)));
}

std::string storage_text(const QuantizedModel& qm, const StorageUnit& st, const Ddag& dag,
                         const std::string& name, const std::string& banner)
{
    const int row_w = dag.state_bits;
    const int col_w = qm.counter_bits();
    const int word_w = st.word_bits();
    std::ostringstream os;
    os << banner_lines(banner);
    os << "// " << name << "_storage: " << st.rows() << " rows x " << st.words_per_row() << " words x "
       << word_w << " bits, " << (st.kind() == StorageKind::Mux ? "bespoke MUX" : "crossbar ROM, 2-bit dots")
       << "\n// column 0 holds the bias code, columns 1..m the weights\n";
    os << "module " << name << "_storage (\n"
       << "    input  wire [" << row_w - 1 << ":0] row,\n"
       << "    input  wire [" << col_w - 1 << ":0] col,\n"
       << "    output reg  signed [" << word_w - 1 << ":0] word\n"
       << ");\n";
    if (st.kind() == StorageKind::Rom)
        os << "    reg [" << 2 * st.cells_per_word() - 1 << ":0] dots;\n";
    os << "    always @(*) begin\n"
       << "        case ({row, col})\n";
    for (int r = 0; r < st.rows(); ++r) {
        for (int c = 0; c < st.words_per_row(); ++c) {
            os << "            {" << ulit(row_w, r) << ", " << ulit(col_w, c) << "}: ";
            if (st.kind() == StorageKind::Mux) {
                os << "word = " << slit(word_w, st.read(r, c)) << ";\n";
            } else {
                os << "dots = {";
                const auto d = st.dots(r, c);
                for (std::size_t k = 0; k < d.size(); ++k)
                    os << (k ? ", " : "") << ulit(2, d[k]);
                os << "};\n";
            }
        }
    }
    if (st.kind() == StorageKind::Mux) {
        os << "            default: word = " << slit(word_w, 0) << ";\n"
           << "        endcase\n";
    } else {
        os << "            default: dots = " << ulit(2 * st.cells_per_word(), 0) << ";\n"
           << "        endcase\n"
           << "        word = dots[" << word_w - 1 << ":0];\n";
    }
    os << "    end\n"
       << "endmodule\n";
    return os.str();
}

std::string top_text(const QuantizedModel& qm, const Ddag& dag, const std::string& name,
                     const std::string& banner)
{
    const int m = static_cast<int>(qm.n_features);
    const int in_w = qm.input_fmt.total_bits;
    const int word_w = qm.param_bits;
    const int acc_w = qm.acc_width;
    const int cnt_w = qm.counter_bits();
    const int state_w = dag.state_bits;
    const int class_w = class_width(qm.n_classes);
    const int tgt_w = std::max(state_w, class_w);

    std::ostringstream os;
    os << banner_lines(banner);

    // Engine: one MAC, bias first. acc_next is combinational so the control
    // unit can advance on the same edge as the last accumulation.
    os << "// " << name << "_engine: single-MAC support vector engine\n"
       << "module " << name << "_engine #(\n"
       << "    parameter M = " << m << ",\n"
       << "    parameter IN_W = " << in_w << ",\n"
       << "    parameter WORD_W = " << word_w << ",\n"
       << "    parameter ACC_W = " << acc_w << ",\n"
       << "    parameter CNT_W = " << cnt_w << ",\n"
       << "    parameter BIAS_SHIFT = " << qm.bias_shift << "\n"
       << ") (\n"
       << "    input  wire clk,\n"
       << "    input  wire rst,\n"
       << "    input  wire busy,\n"
       << "    input  wire signed [WORD_W-1:0] word,\n"
       << "    input  wire [M*IN_W-1:0] x_flat,\n"
       << "    output reg  [CNT_W-1:0] counter,\n"
       << "    output wire ready,\n"
       << "    output wire y\n"
       << ");\n"
       << "    reg  signed [ACC_W-1:0] acc;\n"
       << "    wire [CNT_W-1:0] idx = (counter == 0) ? {CNT_W{1'b0}} : counter - 1'b1;\n"
       << "    wire [IN_W-1:0] x_cur = x_flat[idx*IN_W +: IN_W];\n"
       << "    wire signed [WORD_W+IN_W:0] prod = word * $signed({1'b0, x_cur});\n"
       << "    wire signed [ACC_W-1:0] bias_ext = $signed(word) <<< BIAS_SHIFT;\n"
       << "    wire signed [ACC_W-1:0] acc_next = (counter == 0) ? bias_ext : acc + prod;\n"
       << "    assign ready = busy && (counter == M);\n"
       << "    assign y = ~acc_next[ACC_W-1];\n"
       << "    always @(posedge clk) begin\n"
       << "        if (rst || !busy) begin\n"
       << "            counter <= {CNT_W{1'b0}};\n"
       << "            acc <= {ACC_W{1'b0}};\n"
       << "        end else begin\n"
       << "            acc <= acc_next;\n"
       << "            counter <= ready ? {CNT_W{1'b0}} : counter + 1'b1;\n"
       << "        end\n"
       << "    end\n"
       << "endmodule\n\n";

    // Control FSM: hardwired row index (= state id) and two next states.
    os << "// " << name << "_control: DDAG control FSM, " << dag.nodes.size() << " states\n"
       << "module " << name << "_control (\n"
       << "    input  wire clk,\n"
       << "    input  wire rst,\n"
       << "    input  wire start,\n"
       << "    input  wire ready,\n"
       << "    input  wire y,\n"
       << "    output reg  [" << state_w - 1 << ":0] state,\n"
       << "    output reg  busy,\n"
       << "    output reg  done,\n"
       << "    output reg  [" << class_w - 1 << ":0] class_out\n"
       << ");\n"
       << "    reg leaf_a, leaf_b;\n"
       << "    reg [" << tgt_w - 1 << ":0] tgt_a, tgt_b;\n"
       << "    always @(*) begin\n"
       << "        case (state)\n";
    for (const auto& nd : dag.nodes) {
        os << "            " << ulit(state_w, nd.state) << ": begin leaf_a = 1'b" << nd.if_a_wins.leaf
           << "; tgt_a = " << ulit(tgt_w, nd.if_a_wins.target) << "; leaf_b = 1'b" << nd.if_b_wins.leaf
           << "; tgt_b = " << ulit(tgt_w, nd.if_b_wins.target) << "; end  // " << nd.class_a << " vs "
           << nd.class_b << "\n";
    }
    os << "            default: begin leaf_a = 1'b1; tgt_a = " << ulit(tgt_w, 0) << "; leaf_b = 1'b1; tgt_b = "
       << ulit(tgt_w, 0) << "; end\n"
       << "        endcase\n"
       << "    end\n"
       << "    always @(posedge clk) begin\n"
       << "        if (rst) begin\n"
       << "            state <= " << ulit(state_w, dag.initial_state) << ";\n"
       << "            busy <= 1'b0;\n"
       << "            done <= 1'b0;\n"
       << "            class_out <= " << ulit(class_w, 0) << ";\n"
       << "        end else if (start && !busy) begin\n"
       << "            state <= " << ulit(state_w, dag.initial_state) << ";\n"
       << "            busy <= 1'b1;\n"
       << "            done <= 1'b0;\n"
       << "        end else if (busy && ready) begin\n"
       << "            if (y ? leaf_a : leaf_b) begin\n"
       << "                busy <= 1'b0;\n"
       << "                done <= 1'b1;\n"
       << "                class_out <= y ? tgt_a[" << class_w - 1 << ":0] : tgt_b[" << class_w - 1 << ":0];\n"
       << "            end else begin\n"
       << "                state <= y ? tgt_a[" << state_w - 1 << ":0] : tgt_b[" << state_w - 1 << ":0];\n"
       << "            end\n"
       << "        end\n"
       << "    end\n"
       << "endmodule\n\n";

    os << "// " << name << "_top: " << qm.n_classes << " classes, " << m << " features, " << in_w
       << "-bit inputs, " << word_w << "-bit parameters, " << acc_w << "-bit accumulator\n"
       << "module " << name << "_top (\n"
       << "    input  wire clk,\n"
       << "    input  wire rst,\n"
       << "    input  wire start,\n"
       << "    input  wire [" << m * in_w - 1 << ":0] x_flat,\n"
       << "    output wire done,\n"
       << "    output wire busy,\n"
       << "    output wire [" << class_w - 1 << ":0] class_out,\n"
       << "    output wire [" << state_w - 1 << ":0] state\n"
       << ");\n"
       << "    wire [" << cnt_w - 1 << ":0] counter;\n"
       << "    wire signed [" << word_w - 1 << ":0] word;\n"
       << "    wire ready, y;\n"
       << "    " << name << "_storage u_storage (.row(state), .col(counter), .word(word));\n"
       << "    " << name << "_engine u_engine (.clk(clk), .rst(rst), .busy(busy), .word(word), .x_flat(x_flat),\n"
       << "        .counter(counter), .ready(ready), .y(y));\n"
       << "    " << name << "_control u_control (.clk(clk), .rst(rst), .start(start), .ready(ready), .y(y),\n"
       << "        .state(state), .busy(busy), .done(done), .class_out(class_out));\n"
       << "endmodule\n";
    return os.str();
}

std::string testbench_text(const QuantizedModel& qm, const Ddag& dag, const std::string& name,
                           const std::string& banner)
{
    const int m = static_cast<int>(qm.n_features);
    const int in_w = qm.input_fmt.total_bits;
    const int class_w = class_width(qm.n_classes);
    std::ostringstream os;
    os << banner_lines(banner);
    os << "// " << name << "_tb: replays vectors.stim and checks vectors.expect\n"
       << "`timescale 1ns/1ps\n"
       << "module " << name << "_tb;\n"
       << "    reg clk = 1'b0;\n"
       << "    reg rst = 1'b1;\n"
       << "    reg start = 1'b0;\n"
       << "    reg [" << m * in_w - 1 << ":0] x_flat = 0;\n"
       << "    wire done, busy;\n"
       << "    wire [" << class_w - 1 << ":0] class_out;\n"
       << "    wire [" << dag.state_bits - 1 << ":0] state;\n"
       << "    integer fs, fe, r, j, v, idx, budget, e_idx, e_class, e_state, e_cycles, cycles, errors, count;\n"
       << "    reg [8*256-1:0] line;\n"
       << "    " << name << "_top dut (.clk(clk), .rst(rst), .start(start), .x_flat(x_flat), .done(done),\n"
       << "        .busy(busy), .class_out(class_out), .state(state));\n"
       << "    always #5 clk = ~clk;\n"
       << "    initial begin\n"
       << "        errors = 0;\n"
       << "        count = 0;\n"
       << "        fs = $fopen(\"vectors.stim\", \"r\");\n"
       << "        fe = $fopen(\"vectors.expect\", \"r\");\n"
       << "        v = $fgetc(fs);\n"
       << "        while (v == \"#\") begin r = $fgets(line, fs); v = $fgetc(fs); end\n"
       << "        r = $ungetc(v, fs);\n"
       << "        v = $fgetc(fe);\n"
       << "        while (v == \"#\") begin r = $fgets(line, fe); v = $fgetc(fe); end\n"
       << "        r = $ungetc(v, fe);\n"
       << "        @(posedge clk);\n"
       << "        rst = 1'b0;\n"
       << "        while ($fscanf(fs, \"%d\", idx) == 1) begin\n"
       << "            for (j = 0; j < " << m << "; j = j + 1) begin\n"
       << "                r = $fscanf(fs, \"%d\", v);\n"
       << "                x_flat[j*" << in_w << " +: " << in_w << "] = v;\n"
       << "            end\n"
       << "            r = $fscanf(fs, \"%d\", budget);\n"
       << "            r = $fscanf(fe, \"%d %d %d %d\", e_idx, e_class, e_state, e_cycles);\n"
       << "            @(negedge clk) start = 1'b1;\n"
       << "            @(negedge clk) start = 1'b0;\n"
       << "            cycles = 0;\n"
       << "            while (busy) begin\n"
       << "                @(negedge clk);\n"
       << "                cycles = cycles + 1;\n"
       << "            end\n"
       << "            if (class_out !== e_class || cycles != budget) begin\n"
       << "                errors = errors + 1;\n"
       << "                $display(\"MISMATCH vector %0d: class %0d (expected %0d), cycles %0d (expected %0d)\",\n"
       << "                         idx, class_out, e_class, cycles, budget);\n"
       << "            end\n"
       << "            count = count + 1;\n"
       << "        end\n"
       << "        $display(\"%0d vectors, %0d errors\", count, errors);\n"
       << "        $finish;\n"
       << "    end\n"
       << "endmodule\n";
    return os.str();
}

}  // namespace

std::string sanitize_identifier(const std::string& text)
{
    std::string out;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
    }
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])))
        out = "m_" + out;
    return out;
}

HdlBundle generate(const QuantizedModel& qm, const Ddag& dag, const ArchConfig& arch, const HdlOptions& opts)
{
    qm.validate();
    dag.validate();
    if (qm.acc_width < 1)
        throw HdlError("accumulator width has not been profiled");
    if (dag.n_classes != qm.n_classes)
        throw HdlError("DDAG and model disagree on the class count");
    StorageUnit st;
    try {
        st = compile_storage(qm, arch.storage, arch.adc_count);
    } catch (const StorageError& e) {
        throw HdlError(e.what());
    }
    HdlBundle b;
    b.module_name = sanitize_identifier(opts.module_name);
    b.storage_text = storage_text(qm, st, dag, b.module_name, opts.banner);
    b.top_text = top_text(qm, dag, b.module_name, opts.banner);
    b.testbench_text = testbench_text(qm, dag, b.module_name, opts.banner);
    return b;
}

GoldenFiles emit_golden_vectors(const QuantizedModel& qm, const Ddag& dag, const StorageUnit& storage,
                                const CodeMatrix& inputs, std::size_t count, const std::string& banner)
{
    count = std::min(count, inputs.size());
    const auto budget = cycles_per_inference(qm.n_classes, qm.n_features);
    GoldenFiles g;
    std::ostringstream stim;
    std::ostringstream expect;
    stim << "# index x_1..x_" << qm.n_features << " cycle_budget\n";
    expect << "# index class final_state cycles\n";
    for (const auto& text : {&stim, &expect})
        if (!banner.empty()) {
            std::istringstream in(banner);
            std::string line;
            while (std::getline(in, line))
                *text << "# " << line << '\n';
        }
    for (std::size_t i = 0; i < count; ++i) {
        const auto r = simulate(qm, dag, storage, inputs[i], false);
        g.vectors.push_back({inputs[i], r.predicted, r.final_state, r.trace.cycles});
        stim << i;
        for (auto x : inputs[i])
            stim << ' ' << x;
        stim << ' ' << budget << '\n';
        expect << i << ' ' << r.predicted << ' ' << r.final_state << ' ' << r.trace.cycles << '\n';
    }
    g.stim = stim.str();
    g.expect = expect.str();
    return g;
}

std::vector<std::vector<std::int64_t>> parse_storage_table(const std::string& text)
{
    static const std::regex mux_re(R"(\{\d+'d(\d+), \d+'d(\d+)\}: word = (-?)\d+'sd(\d+);)");
    static const std::regex rom_re(R"(\{\d+'d(\d+), \d+'d(\d+)\}: dots = \{([^}]*)\};)");
    static const std::regex dot_re(R"(2'd(\d))");
    static const std::regex width_re(R"(output reg  signed \[(\d+):0\] word)");

    std::smatch wm;
    if (!std::regex_search(text, wm, width_re))
        throw HdlError("storage text has no word port");
    const int word_bits = std::stoi(wm[1]) + 1;

    std::vector<std::vector<std::int64_t>> table;
    const auto put = [&](std::size_t r, std::size_t c, std::int64_t v) {
        if (table.size() <= r)
            table.resize(r + 1);
        if (table[r].size() <= c)
            table[r].resize(c + 1, 0);
        table[r][c] = v;
    };
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::smatch mm;
        if (std::regex_search(line, mm, mux_re)) {
            const std::int64_t mag = std::stoll(mm[4]);
            put(std::stoul(mm[1]), std::stoul(mm[2]), mm[3].length() ? -mag : mag);
        } else if (std::regex_search(line, mm, rom_re)) {
            std::uint64_t bits = 0;
            const std::string dots = mm[3];
            for (std::sregex_iterator it(dots.begin(), dots.end(), dot_re), end; it != end; ++it)
                bits = (bits << 2) | std::stoull((*it)[1]);
            put(std::stoul(mm[1]), std::stoul(mm[2]), wrap_signed(static_cast<std::int64_t>(bits), word_bits));
        }
    }
    return table;
}

std::vector<ParsedFsmState> parse_fsm_states(const std::string& text)
{
    static const std::regex re(
        R"(\d+'d(\d+): begin leaf_a = 1'b([01]); tgt_a = \d+'d(\d+); leaf_b = 1'b([01]); tgt_b = \d+'d(\d+); end)");
    std::vector<ParsedFsmState> out;
    for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
        const auto& m = *it;
        out.push_back({std::stoi(m[1]), m[2] == "1", std::stoi(m[3]), m[4] == "1", std::stoi(m[5])});
    }
    return out;
}

}  // namespace seqsvm
