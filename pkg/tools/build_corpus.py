#!/usr/bin/env python3
"""
Generate the bundled mock apps, task corpus and golden actions.

    python3 tools/build_corpus.py [--check]

Writes src/trajeval/data/apps/*.json and src/trajeval/data/corpus/{tasks,golden}.json,
then replays every golden script to make sure it solves its task.
With --check, only verifies that the files on disk match what would be written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import quoteattr

from trajeval.actions import Action, format_unified

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "trajeval" / "data"

W, H = 1080, 2400
CENTER = (540, 1200)
POPUP_CLOSE = "[860,700][960,800]"


def _b(x1, y1, x2, y2) -> str:
    return f"[{x1},{y1}][{x2},{y2}]"


def center(region: str) -> Tuple[int, int]:
    a, b = region[1:-1].split("][")
    x1, y1 = map(int, a.split(","))
    x2, y2 = map(int, b.split(","))
    return (x1 + x2) // 2, (y1 + y2) // 2


class Xml:
    """Builds dump-dialect node strings for one package."""

    def __init__(self, package: str):
        self.package = package

    def node(
        self,
        cls: str,
        bounds: str,
        text: str = "",
        rid: str = "",
        desc: str = "",
        clickable: bool = False,
        selected: bool = False,
        children: Sequence[str] = (),
        if_flag: Optional[str] = None,
        unless_flag: Optional[str] = None,
    ) -> str:
        rid = f"{self.package}:id/{rid}" if rid else ""
        attrs = [
            ("index", "0"),
            ("text", text),
            ("resource-id", rid),
            ("class", cls),
            ("package", self.package),
            ("content-desc", desc),
            ("checkable", "false"),
            ("checked", "false"),
            ("clickable", str(clickable).lower()),
            ("enabled", "true"),
            ("focusable", str(clickable).lower()),
            ("focused", "false"),
            ("scrollable", "false"),
            ("long-clickable", "false"),
            ("password", "false"),
            ("selected", str(selected).lower()),
            ("bounds", bounds),
        ]
        if if_flag:
            attrs.append(("if-flag", if_flag))
        if unless_flag:
            attrs.append(("unless-flag", unless_flag))
        head = "<node " + " ".join(f"{k}={quoteattr(v)}" for k, v in attrs)
        if not children:
            return head + " />"
        return head + ">" + "".join(children) + "</node>"

    def text(self, text: str, bounds: str, rid: str = "title", **kw) -> str:
        return self.node("android.widget.TextView", bounds, text=text, rid=rid, **kw)

    def row(self, i: int, text: str, rid: str = "title", **kw) -> Tuple[str, str]:
        """Clickable ViewGroup row with a TextView child; returns (xml, row bounds)."""
        y = 300 + i * 200
        region = _b(40, y, 1040, y + 160)
        flags = {k: kw.pop(k) for k in ("if_flag", "unless_flag") if k in kw}
        child = self.text(text, _b(80, y + 40, 800, y + 120), rid=rid, **kw)
        icon = self.node("android.widget.ImageView", _b(900, y + 40, 980, y + 120), rid="arrow")
        return self.node("android.view.ViewGroup", region, clickable=True, children=[child, icon], **flags), region

    def icon(self, region: str, rid: str, desc: str = "", **kw) -> str:
        return self.node("android.widget.ImageView", region, rid=rid, desc=desc, clickable=True, **kw)

    def title(self, text: str) -> str:
        return self.text(text, _b(40, 140, 700, 240), rid="page_title")

    def tabs(self, labels: Sequence[str], selected: Optional[int]) -> Tuple[str, List[str]]:
        width = W // len(labels)
        regions, kids = [], []
        for i, label in enumerate(labels):
            region = _b(i * width, 2220, (i + 1) * width, H)
            t = self.text(label, _b(i * width + 40, 2260, (i + 1) * width - 40, 2340), rid="tab_title", selected=i == selected)
            kids.append(self.node("android.widget.FrameLayout", region, clickable=True, selected=i == selected, children=[t]))
            regions.append(region)
        return self.node("android.widget.LinearLayout", _b(0, 2220, W, H), children=kids), regions

    def screen(self, nodes: Sequence[str]) -> str:
        content = self.node("android.widget.FrameLayout", _b(0, 0, W, H), children=list(nodes))
        return f'<hierarchy rotation="0">{content}</hierarchy>'


class App:
    def __init__(self, app_id: str, package: str, initial: str):
        self.app_id = app_id
        self.x = Xml(package)
        self.package = package
        self.initial = initial
        self.pages: Dict[str, dict] = {}
        self.transitions: List[dict] = []
        self.flags: Dict[str, bool] = {}
        self.irreversible: List[str] = []

    def page(self, pid: str, nodes: Sequence[str], back: Optional[str] = None) -> None:
        assert pid not in self.pages, pid
        self.pages[pid] = {"xml": self.x.screen(nodes), "back": back}

    def on(self, src, dst, kind="click", region=None, direction=None, content=None, when=None, set_flags=None):
        trig = {"kind": kind}
        if region:
            trig["region"] = region
        if direction:
            trig["direction"] = direction
        if content is not None:
            trig["content"] = content
        t = {"from": src, "to": dst, "trigger": trig}
        if when:
            t["when"] = when
        if set_flags:
            t["set_flags"] = set_flags
        self.transitions.append(t)

    def noise_templates(self) -> dict:
        x = self.x
        spinner = x.node("android.widget.ProgressBar", _b(440, 1100, 640, 1300), rid="loading_spinner")
        delay = [
            {"id": "loading", "xml": x.screen([spinner, x.text("Loading...", _b(340, 1340, 740, 1420), rid="loading_text")])},
            {"id": "blank", "xml": x.screen([x.node("android.view.View", _b(0, 200, W, 2200), rid="skeleton")])},
        ]
        close = x.icon(POPUP_CLOSE, "popup_close", desc="Close")
        popup = [
            {
                "id": "ad",
                "xml": x.screen(
                    [
                        x.node(
                            "android.widget.FrameLayout",
                            _b(120, 700, 960, 1700),
                            rid="popup_root",
                            children=[
                                x.text("Limited time offer!", _b(200, 900, 880, 1000), rid="popup_title"),
                                x.node("android.widget.Button", _b(240, 1500, 840, 1640), text="Claim now", rid="popup_cta", clickable=True),
                            ],
                        ),
                        close,
                    ]
                ),
                "close_bounds": POPUP_CLOSE,
            },
            {
                "id": "survey",
                "xml": x.screen(
                    [
                        x.node(
                            "android.widget.FrameLayout",
                            _b(120, 700, 960, 1500),
                            rid="popup_root",
                            children=[x.text("How do you like the app?", _b(200, 900, 880, 1000), rid="popup_title")],
                        ),
                        close,
                    ]
                ),
                "close_bounds": POPUP_CLOSE,
            },
        ]
        return {"delay": delay, "popup": popup}

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "package": self.package,
            "initial_page": self.initial,
            "flags": self.flags,
            "irreversible_flags": self.irreversible,
            "pages": self.pages,
            "transitions": self.transitions,
            "noise_templates": self.noise_templates(),
        }


def click(region: str) -> Action:
    return Action.click(*center(region))


def scroll_up() -> Action:
    return Action.scroll(*CENTER, "up")


class Corpus:
    def __init__(self):
        self.tasks: List[dict] = []
        self.reset_tasks: List[dict] = []
        self.golden: Dict[str, List[str]] = {}

    def add(
        self,
        task_id,
        app,
        instruction,
        subset,
        actions: Sequence[Action],
        condition,
        abilities=(),
        reset="None",
        reset_id=None,
        is_reset=False,
    ):
        actions = list(actions) + [Action.finished()]
        entry = {
            "task_id": task_id,
            "app_id": app.app_id,
            "instruction": instruction,
            "subset": subset,
            "golden_steps": len(actions),
            "exploration_abilities": list(abilities),
            "condition": condition,
            "reset_category": reset,
            "reset_task_id": reset_id,
        }
        (self.reset_tasks if is_reset else self.tasks).append(entry)
        self.golden[task_id] = [format_unified(a) for a in actions]
        return entry


def build_miniblog(c: Corpus) -> App:
    app = App("miniblog", "com.example.miniblog", "home")
    x = app.x
    app.flags = {"has_history": False, "unread": True}
    app.irreversible = ["unread"]

    tabs_home, (tab_home, tab_me) = x.tabs(["Home", "Me"], 0)
    tabs_me, _ = x.tabs(["Home", "Me"], 1)
    scan_icon = _b(920, 140, 1040, 260)
    search_row, r_search = x.row(0, "Search", rid="search_box")
    msg_row, r_msg = x.row(1, "Messages")
    feed = [x.row(i, f"Trending video {i}", rid="feed_title")[0] for i in (3, 4, 5)]
    app.page("home", [x.title("Home"), x.icon(scan_icon, "scan_icon"), search_row, msg_row, *feed, tabs_home])
    app.on("home", "me", region=tab_me)
    app.on("home", "search", region=r_search)
    app.on("home", "messages", region=r_msg)
    app.on("home", "scan", region=scan_icon)

    avatar_row, r_avatar = x.row(0, "Avatar")
    fav_row, _ = x.row(1, "My Favorites")
    hist_row, _ = x.row(2, "History")
    app.page("me", [x.title("Me"), avatar_row, fav_row, hist_row, tabs_me], back="home")
    app.on("me", "home", region=tab_home)
    app.on("me", "avatar_edit", region=r_avatar)

    shuffle_row, r_shuffle = x.row(0, "Shuffle")
    album_row, _ = x.row(1, "Upload from Album")
    app.page("avatar_edit", [x.title("Change Avatar"), shuffle_row, album_row], back="me")
    app.on("avatar_edit", None, region=r_shuffle)

    trash = _b(920, 140, 1040, 260)
    search_input = x.node("android.widget.EditText", _b(40, 140, 880, 260), text="Search", rid="search_input", clickable=True)
    search_page = [
        search_input,
        x.icon(trash, "history_clear", desc="Clear history", if_flag="has_history"),
        x.text("Recent searches", _b(40, 300, 700, 380), rid="history_header", if_flag="has_history"),
        x.text("No search history", _b(40, 300, 700, 380), rid="history_empty", unless_flag="has_history"),
    ]
    app.page("search", search_page, back="home")
    queries = {"gold price": ("Gold", "search_gold"), "stock price": ("Stock", "search_stock")}
    for query, (word, pid) in queries.items():
        q = x.node("android.widget.EditText", _b(40, 140, 880, 260), text=query, rid="search_query", clickable=True)
        rows = [x.row(i, f"{word} {kind} today", rid="result_title")[0] for i, kind in enumerate(["price", "chart", "news"], start=1)]
        app.page(pid, [q, *rows], back="search")
        app.on("search", pid, kind="type", content=query, set_flags={"has_history": True})
    app.on("search", "history_manage", region=trash, when={"has_history": True})

    del_row, r_del = x.row(0, "Delete All")
    app.page("history_manage", [x.title("Manage History"), del_row], back="search")
    app.on("history_manage", "history_confirm", region=r_del)
    confirm = _b(560, 1300, 1000, 1440)
    app.page(
        "history_confirm",
        [
            x.text("Delete all search history?", _b(120, 1000, 960, 1100), rid="dialog_message"),
            x.node("android.widget.Button", _b(80, 1300, 520, 1440), text="Cancel", rid="dialog_cancel", clickable=True),
            x.node("android.widget.Button", confirm, text="Confirm", rid="dialog_confirm", clickable=True),
        ],
        back="history_manage",
    )
    app.on("history_confirm", "search", region=confirm, set_flags={"has_history": False})
    app.on("history_confirm", "history_manage", region=_b(80, 1300, 520, 1440))

    read_all = _b(760, 140, 1040, 240)
    msg_rows = []
    for i, who in enumerate(["Alice", "Bob", "Carol"], start=1):
        y = 300 + i * 200
        badge = x.text("1", _b(960, y + 40, 1020, y + 100), rid="unread_badge", if_flag="unread")
        name = x.text(f"{who}: new message", _b(80, y + 40, 800, y + 120), rid="msg_preview")
        msg_rows.append(x.node("android.view.ViewGroup", _b(40, y, 1040, y + 160), clickable=True, children=[name, badge]))
    app.page(
        "messages",
        [
            x.text("Messages", _b(40, 140, 700, 240), rid="msg_title"),
            x.node("android.widget.Button", read_all, text="Mark all as read", rid="read_all", clickable=True),
            x.text("All messages read", _b(40, 300, 700, 380), rid="msg_status", unless_flag="unread"),
            *msg_rows,
        ],
        back="home",
    )
    app.on("messages", None, region=read_all, set_flags={"unread": False})

    app.page("scan", [x.text("Scan QR code", _b(40, 140, 700, 240), rid="scan_title")], back="home")

    avatar_cond = (
        '1.//*[(@text="Avatar" or @text=“Change Avatar“) and bbox_contains_point(../@bounds, $point)]\n'
        '2.//*[@text="Shuffle" and bbox_contains_point(../@bounds,$point) and contains(@package,"miniblog")]'
    )
    avatar_actions = [click(tab_me), click(r_avatar), click(r_shuffle)]
    c.add("blog_avatar", app, "Open MiniBlog and change my profile avatar to a random one.", "Base", avatar_actions, avatar_cond)

    def search_cond(query, word):
        return (
            f'//*[@text="{query}" and contains(@resource-id, "search_query")] '
            f'and //*[contains(@text, "{word}") and contains(@resource-id, "result_title") and contains(@package, "miniblog")]'
        )

    gold = [click(r_search), Action.type_text("gold price")]
    c.add("blog_search_gold", app, "Search for today's gold price on MiniBlog.", "Base", gold, search_cond("gold price", "Gold"), reset="AppLevel", reset_id="blog_clear_history")
    c.add(
        "blog_search_stock",
        app,
        "Look up today's stock price on MiniBlog.",
        "LongTail",
        [click(r_search), Action.type_text("stock price")],
        search_cond("stock price", "Stock"),
        reset="AppLevel",
        reset_id="blog_clear_history",
    )
    c.add(
        "blog_read_all",
        app,
        "Open MiniBlog messages and mark all as read with one click.",
        "Base",
        [click(r_msg), click(read_all)],
        '//*[(@text="Mark all as read" and bbox_contains_point(@bounds, $point)) or (@text="All messages read" and contains(@resource-id, "msg_status"))]',
        reset="Infeasible",
    )
    c.add(
        "blog_scan",
        app,
        "Navigate to MiniBlog's scan function.",
        "GuiReasoning",
        [click(scan_icon)],
        '//*[@text="Scan QR code" and contains(@resource-id, "scan_title")]',
        abilities=["IconUnderstanding"],
    )
    c.add("nr_blog_avatar", app, "Open MiniBlog and change my profile avatar to a random one.", "NoiseRobust", avatar_actions, avatar_cond)
    c.add("nr_blog_search_gold", app, "Search for today's gold price on MiniBlog.", "NoiseRobust", gold, search_cond("gold price", "Gold"), reset="AppLevel", reset_id="blog_clear_history")
    c.add(
        "blog_clear_history",
        app,
        'Clear MiniBlog search history. Follow these steps: 1. Open MiniBlog and click the "Search" bar near the top. '
        "2. If a trash can icon is shown in the upper right corner, click it; if there is none, the history is already empty. "
        '3. Click "Delete All". 4. Click "Confirm" in the dialog.',
        "Base",
        [click(r_search), click(trash), click(r_del), click(confirm)],
        '//*[@text="No search history" and contains(@resource-id, "history_empty") and contains(@package, "miniblog")]',
        is_reset=True,
    )
    return app


def build_minishop(c: Corpus) -> App:
    app = App("minishop", "com.example.minishop", "home")
    x = app.x
    app.flags = {"senior_mode": False}
    labels = ["Home", "Cart", "Personal Center"]
    tabs_home, (_, _, tab_pc) = x.tabs(labels, 0)
    tabs_pc, (tab_home_pc, _, _) = x.tabs(labels, 2)

    cat_icon = _b(40, 140, 160, 260)
    deals = [x.row(i, f"Daily deal {i}", rid="deal_title")[0] for i in (1, 2, 3)]
    large = x.text("Large Text", _b(700, 300, 1040, 380), rid="senior_badge", if_flag="senior_mode")
    app.page("home", [x.icon(cat_icon, "category_icon"), *deals, large, tabs_home])
    app.on("home", "pc", region=tab_pc)
    app.on("home", "categories", region=cat_icon)

    status = [
        x.text("Senior Mode: On", _b(40, 1900, 700, 1980), rid="senior_status", if_flag="senior_mode"),
        x.text("Senior Mode: Off", _b(40, 1900, 700, 1980), rid="senior_status", unless_flag="senior_mode"),
    ]
    close_large = _b(760, 120, 1040, 220)
    orders_row, r_orders = x.row(0, "My Orders")
    senior_row, r_senior = x.row(1, "Senior Mode")
    app.page(
        "pc",
        [
            x.title("Personal Center"),
            x.node("android.widget.Button", close_large, text="Close Large Text", rid="close_large_text", clickable=True, if_flag="senior_mode"),
            orders_row,
            senior_row,
            *status,
            tabs_pc,
        ],
        back="home",
    )
    app.on("pc", "home", region=tab_home_pc)
    app.on("pc", "senior", region=close_large, when={"senior_mode": True})
    app.on("pc", "senior", region=r_senior)

    open_row, r_toggle = x.row(1, "Open Senior Mode", rid="senior_toggle", unless_flag="senior_mode")
    close_row, _ = x.row(1, "Close Senior Mode", rid="senior_toggle", if_flag="senior_mode")
    app.page("senior", [x.title("Senior Mode"), open_row, close_row, *status], back="pc")
    app.on("senior", None, region=r_toggle, when={"senior_mode": False}, set_flags={"senior_mode": True})
    app.on("senior", None, region=r_toggle, when={"senior_mode": True}, set_flags={"senior_mode": False})

    # Pending order chain: eight pages deep.
    chain = [
        ("pc", r_orders, "orders", "All Orders", "More Filters"),
        ("orders", None, "filters", "Filters", "Status"),
        ("filters", None, "status_filter", "Order Status", "Pending Shipment"),
        ("status_filter", None, "pending", "Pending Shipment", "Order #1024"),
        ("pending", None, "order_detail", "Order Details", "View Logistics"),
    ]
    order_actions = [click(tab_pc)]
    region = r_orders
    for src, _, pid, title, next_label in chain:
        row, next_region = x.row(0, next_label)
        extra = [x.row(1, "Order #1023")[0]] if pid == "pending" else []
        app.page(pid, [x.title(title), row, *extra], back=src)
        app.on(src, pid, region=region)
        order_actions.append(click(region))
        region = next_region
    app.page(
        "logistics",
        [x.text("Logistics Details", _b(40, 140, 700, 240), rid="logistics_title"), x.text("Order #1024: awaiting pickup", _b(40, 300, 1040, 380), rid="logistics_order")],
        back="order_detail",
    )
    app.on("order_detail", "logistics", region=region)
    order_actions.append(click(region))

    women_row, _ = x.row(0, "Women")
    men_row, r_men = x.row(1, "Men")
    app.page("categories", [x.title("Categories"), women_row, men_row], back="home")
    app.on("categories", "men", region=r_men)
    crumb = x.text("Men", _b(40, 140, 400, 240), rid="breadcrumb")
    app.page("men", [crumb, x.row(0, "Shirts")[0], x.row(1, "Pants")[0]], back="categories")
    app.on("men", "men_more", kind="scroll", direction="up")
    jackets_row, r_jackets = x.row(2, "Jackets")
    app.page("men_more", [crumb, x.row(1, "Pants")[0], jackets_row], back="categories")
    app.on("men_more", "men", kind="scroll", direction="down")
    app.on("men_more", "jackets", region=r_jackets)
    wind_row, r_wind = x.row(0, "Windbreaker Jacket", rid="product_name")
    app.page("jackets", [crumb, wind_row, x.row(1, "Down Jacket", rid="product_name")[0]], back="men_more")
    app.on("jackets", "product", region=r_wind)
    app.page(
        "product",
        [crumb, x.text("Windbreaker Jacket", _b(40, 300, 1040, 400), rid="product_title"), x.text("$59.00", _b(40, 420, 400, 500), rid="product_price")],
        back="jackets",
    )

    senior_cond = '//*[@text="Senior Mode: On" and contains(@resource-id, "senior_status") and contains(@package, "minishop")]'
    c.add(
        "shop_senior_on",
        app,
        "Turn on MiniShop's senior mode.",
        "Base",
        [click(tab_pc), click(r_senior), click(r_toggle)],
        senior_cond,
        reset="TaskLevel",
        reset_id="shop_senior_off",
    )
    c.add(
        "shop_pending_logistics",
        app,
        "Check the logistics of my order that is pending shipment on MiniShop.",
        "Base",
        order_actions,
        '//*[@text="Logistics Details" and contains(@resource-id, "logistics_title")] and //*[contains(@text, "#1024") and contains(@resource-id, "logistics_order")]',
    )
    c.add(
        "shop_men_jacket",
        app,
        "Find a men's windbreaker jacket on MiniShop.",
        "GuiReasoning",
        [click(cat_icon), click(r_men), scroll_up(), click(r_jackets), click(r_wind)],
        '//*[contains(@text, "Windbreaker Jacket") and contains(@resource-id, "product_title")] and //*[@text="Men" and contains(@resource-id, "breadcrumb")]',
        abilities=["IconUnderstanding", "HiddenFunctionDiscovery"],
    )
    c.add(
        "shop_senior_off",
        app,
        'Turn off MiniShop\'s senior mode. Follow these steps: 1. Open MiniShop and click the "Personal Center" button in the lower right corner. '
        '2. If there is a "Close Large Text" button in the upper right corner, it means Senior Mode is enabled, click it. '
        "If the button is not there, Senior Mode is already off, and no further action is needed. "
        '3. On the Senior Mode page, click "Close Senior Mode" to complete the process.',
        "Base",
        [click(tab_pc), click(close_large), click(r_toggle)],
        '//*[@text="Senior Mode: Off" and contains(@resource-id, "senior_status") and contains(@package, "minishop")]',
        is_reset=True,
    )
    return app


FONT_START = 40


def build_minireader(c: Corpus) -> App:
    app = App("minireader", "com.example.minireader", "home")
    x = app.x
    labels = ["Library", "Discover", "Me"]
    tabs_home, (_, _, tab_me) = x.tabs(labels, 0)
    tabs_me, (tab_lib, _, _) = x.tabs(labels, 2)
    app.page("home", [x.title("Library"), *(x.row(i, f"Book {i + 1}", rid="book_title")[0] for i in range(4)), tabs_home])
    app.on("home", "me", region=tab_me)

    # Settings and Help Center sit below the fold of the Me page.
    me_rows = [x.row(i, t)[0] for i, t in enumerate(["Bookshelf", "Reading History", "Downloads"])]
    app.page("me", [x.title("Me"), *me_rows, tabs_me], back="home")
    app.on("me", "home", region=tab_lib)
    app.on("me", "me_more", kind="scroll", direction="up")
    settings_row, r_settings = x.row(1, "Settings")
    help_row, r_help = x.row(2, "Help Center")
    app.page("me_more", [x.row(0, "Downloads")[0], settings_row, help_row, tabs_me], back="home")
    app.on("me_more", "me", kind="scroll", direction="down")
    app.on("me_more", "home", region=tab_lib)
    app.on("me_more", "settings", region=r_settings)
    app.on("me_more", "help", region=r_help)

    cs_row, r_cs = x.row(0, "Customer Service")
    app.page("help", [x.title("Help Center"), cs_row, x.row(1, "FAQ")[0]], back="me_more")
    app.on("help", "chat", region=r_cs)
    app.page("chat", [x.title("Customer Service"), x.text("How can we help you?", _b(40, 300, 1040, 380), rid="chat_greeting")], back="help")

    display_row, r_display = x.row(0, "Display")
    general_row, r_general = x.row(1, "General")
    app.page("settings", [x.title("Settings"), display_row, general_row], back="me_more")
    app.on("settings", "display", region=r_display)
    app.on("settings", "general", region=r_general)
    font_row, r_font = x.row(0, "Font Size")
    app.page("display", [x.title("Display"), font_row], back="settings")
    app.on("display", f"font_{FONT_START}", region=r_font)

    dec = _b(40, 700, 500, 860)
    inc = _b(580, 700, 1040, 860)
    for n in range(FONT_START + 1):
        app.page(
            f"font_{n}",
            [
                x.title("Font Size"),
                x.text(f"Font Size: {n}", _b(40, 400, 700, 500), rid="font_value"),
                x.node("android.widget.Button", dec, text="Decrease", rid="font_decrease", clickable=True),
                x.node("android.widget.Button", inc, text="Increase", rid="font_increase", clickable=True),
            ],
            back="display",
        )
        if n > 0:
            app.on(f"font_{n}", f"font_{n - 1}", region=dec)
        if n < FONT_START:
            app.on(f"font_{n}", f"font_{n + 1}", region=inc)

    playback_row, r_playback = x.row(0, "Playback")
    app.page("general", [x.title("General"), playback_row], back="settings")
    app.on("general", "playback", region=r_playback)
    adv_row, r_adv = x.row(1, "Advanced")
    app.page("playback", [x.title("Playback"), x.row(0, "Autoplay")[0], adv_row], back="general")
    app.on("playback", "advanced", region=r_adv)
    app.page("advanced", [x.title("Advanced"), *(x.row(i, t)[0] for i, t in enumerate(["Cache", "Network"]))], back="playback")
    app.on("advanced", "advanced_more", kind="scroll", direction="up")
    timer_row, r_timer = x.row(1, "Sleep Timer")
    app.page("advanced_more", [x.title("Advanced"), x.row(0, "Network")[0], timer_row], back="playback")
    app.on("advanced_more", "advanced", kind="scroll", direction="down")
    app.on("advanced_more", "timer", region=r_timer)
    m15_row, r_m15 = x.row(1, "15 minutes")
    app.page("timer", [x.title("Sleep Timer"), x.row(0, "5 minutes")[0], m15_row, x.row(2, "30 minutes")[0]], back="advanced_more")
    app.on("timer", "timer_confirm", region=r_m15)
    start = _b(240, 1300, 840, 1440)
    app.page(
        "timer_confirm",
        [x.text("Turn off after 15 minutes?", _b(120, 1000, 960, 1100), rid="dialog_message"), x.node("android.widget.Button", start, text="Start", rid="timer_start", clickable=True)],
        back="timer",
    )
    app.on("timer_confirm", "timer_set", region=start)
    app.page("timer_set", [x.title("Sleep Timer"), x.text("Timer set: 15 minutes", _b(40, 300, 1040, 380), rid="timer_status")], back="advanced_more")

    to_font = [click(tab_me), scroll_up(), click(r_settings), click(r_display), click(r_font)]
    for task_id, k, subset in [
        ("reader_font_1", 1, "LongTail"),
        ("reader_font_13", 13, "LongTail"),
        ("reader_font_14", 14, "LongHorizon"),
        ("reader_font_25", 25, "LongHorizon"),
    ]:
        target = FONT_START - k
        c.add(
            task_id,
            app,
            f"Decrease MiniReader's font size from {FONT_START} to {target} by pressing Decrease in the display settings.",
            subset,
            to_font + [click(dec)] * k,
            f'//*[@text="Font Size: {target}" and contains(@resource-id, "font_value") and contains(@package, "minireader")]',
        )
    c.add(
        "reader_customer_service",
        app,
        "I want to contact MiniReader customer service.",
        "GuiReasoning",
        [click(tab_me), scroll_up(), click(r_help)],
        '//*[(@text="Customer Service" or @text=“Help Center“) and bbox_contains_point(../@bounds, $point) and contains(@package, "minireader")].',
        abilities=["HierarchicalNavigation", "HiddenFunctionDiscovery"],
    )
    c.add(
        "reader_sleep_timer",
        app,
        "Set a 15-minute turn-off timer in MiniReader.",
        "GuiReasoning",
        [click(tab_me), scroll_up(), click(r_settings), click(r_general), click(r_playback), click(r_adv), scroll_up(), click(r_timer), click(r_m15), click(start)],
        '1.//*[@text="Sleep Timer" and bbox_contains_point(../@bounds, $point)]\n'
        '2.//*[@text="Timer set: 15 minutes" and contains(@resource-id, "timer_status")]',
        abilities=["HierarchicalNavigation", "HiddenFunctionDiscovery", "HiddenFunctionDiscovery"],
    )
    return app


def build_minimap(c: Corpus) -> App:
    app = App("minimap", "com.example.minimap", "home")
    x = app.x
    dir_row, r_dir = x.row(0, "Directions")
    near_row, r_near = x.row(1, "Nearby")
    app.page("home", [x.node("android.widget.EditText", _b(40, 140, 1040, 260), text="Search places", rid="search_bar", clickable=True), dir_row, near_row])
    app.on("home", "route_drive", region=r_dir)
    app.on("home", "nearby", region=r_near)

    mode_tabs = ["Driving", "Public Transportation", "Walking"]
    mode_regions = [_b(40 + i * 340, 140, 360 + i * 340, 240) for i in range(3)]
    start_field = _b(40, 300, 1040, 420)
    end_field = _b(40, 460, 1040, 580)

    def route_page(mode: int, start: str, end: str) -> List[str]:
        tabs = [
            x.node("android.widget.FrameLayout", r, clickable=True, selected=i == mode, children=[x.text(t, r, rid="mode_title", selected=i == mode)])
            for i, (t, r) in enumerate(zip(mode_tabs, mode_regions))
        ]
        return [
            *tabs,
            x.node("android.widget.TextView", start_field, text=start or "Start point", rid="route_edit_summary_start", clickable=True),
            x.node("android.widget.TextView", end_field, text=end or "End point", rid="route_edit_summary_end", clickable=True),
        ]

    start_name, end_name = "Beijing South Railway Station", "Beijing Fengtai Station"
    app.page("route_drive", route_page(0, "", ""), back="home")
    app.on("route_drive", "route_pt", region=mode_regions[1])
    app.page("route_pt", route_page(1, "", ""), back="home")
    app.on("route_pt", "route_drive", region=mode_regions[0])
    app.on("route_pt", "edit_start", region=start_field)
    editor = lambda hint: [x.node("android.widget.EditText", _b(40, 140, 1040, 260), text=hint, rid="poi_input", clickable=True)]
    app.page("edit_start", editor("Enter start point"), back="route_pt")
    app.on("edit_start", "route_pt_s", kind="type", content=start_name)
    app.page("route_pt_s", route_page(1, start_name, ""), back="home")
    app.on("route_pt_s", "edit_end", region=end_field)
    app.page("edit_end", editor("Enter end point"), back="route_pt_s")
    app.on("edit_end", "route_pt_se", kind="type", content=end_name)
    app.page(
        "route_pt_se",
        route_page(1, start_name, end_name) + [x.row(4, "Line 10 > Line 9, 35 min", rid="route_plan")[0]],
        back="home",
    )

    r_food = _b(40, 140, 360, 240)
    hotel = _b(380, 140, 700, 240)

    def nearby_page(sel: Optional[int]) -> List[str]:
        tabs = [
            x.node("android.widget.FrameLayout", r, clickable=True, selected=i == sel, children=[x.text(t, r, rid="tab_title", selected=i == sel)])
            for i, (t, r) in enumerate([("Food", r_food), ("Hotels", hotel)])
        ]
        return tabs

    app.page("nearby", nearby_page(None) + [x.text("Explore what's around you", _b(40, 300, 1040, 380), rid="hint")], back="home")
    app.page("nearby_food", nearby_page(0) + [x.row(i, f"Restaurant {name}", rid="poi_name")[0] for i, name in enumerate(["Noodle House", "Dumpling Bar"], start=1)], back="home")
    app.on("nearby", "nearby_food", region=r_food)
    app.on("nearby_food", None, region=r_food)

    c.add(
        "map_subway_route",
        app,
        f"Find the subway route from {start_name} to {end_name} on MiniMap.",
        "Base",
        [click(r_dir), click(mode_regions[1]), click(start_field), Action.type_text(start_name), click(end_field), Action.type_text(end_name)],
        '//*[contains(@text,"Public Transportation") and @selected="true" and contains(@package,"map")]\n'
        'and //*[contains(@text,"South Railway Station")  and contains(@resource-id, "summary_start")]\n'
        'and //*[contains(@text,"Fengtai Station") and  contains(@resource-id,"summary_end")].',
    )
    c.add(
        "map_nearby_food",
        app,
        "Show restaurants near me on MiniMap.",
        "Base",
        [click(r_near), click(r_food)],
        '//*[@text="Food" and @selected="true" and contains(@resource-id, "tab_title")] and //*[contains(@text, "Restaurant") and contains(@resource-id, "poi_name")]',
    )
    return app


def build() -> Tuple[Dict[str, dict], dict, dict]:
    c = Corpus()
    apps = [build_miniblog(c), build_minishop(c), build_minireader(c), build_minimap(c)]
    return {a.app_id: a.to_dict() for a in apps}, {"tasks": c.tasks, "reset_tasks": c.reset_tasks}, c.golden


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False, sort_keys=False) + "\n"


def outputs() -> Dict[Path, str]:
    apps, corpus, golden = build()
    files = {DATA / "apps" / f"{k}.json": _dump(v) for k, v in apps.items()}
    files[DATA / "corpus" / "tasks.json"] = _dump(corpus)
    files[DATA / "corpus" / "golden.json"] = _dump(golden)
    return files


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--check", action="store_true", help="fail if files on disk are stale")
    args = ap.parse_args(argv)
    files = outputs()
    if args.check:
        stale = [p for p, text in files.items() if not p.exists() or p.read_text(encoding="utf-8") != text]
        for p in stale:
            print(f"stale: {p}")
        return 1 if stale else 0
    for p, text in files.items():
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")

    from trajeval.agents import load_golden_actions
    from trajeval.cli import lint
    from trajeval.simenv import load_apps
    from trajeval.trajectory import load_corpus

    corpus = load_corpus(DATA / "corpus" / "tasks.json")
    problems = lint(corpus, load_apps(DATA / "apps"), load_golden_actions(DATA / "corpus" / "golden.json"))
    for p in problems:
        print(p)
    print(f"{len(corpus.tasks)} tasks, {len(corpus.reset_tasks)} reset tasks")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
