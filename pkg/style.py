import streamlit as st

LAB_BLUE = "#214c6e"
LAB_GREEN = "#1f7a4d"
LAB_RED = "#b42318"


def inject_css(st_obj=st):
    st_obj.markdown(
        f"""
<style>
/* Base */
html, body, [class*="css"] {{
  font-family: ui-sans-serif, system-ui, -apple-system, Segoe UI, Roboto, Arial;
}}
a {{ color: {LAB_BLUE}; text-decoration: none; }}
a:hover {{ text-decoration: underline; }}

.lab-card {{
  border: 1px solid rgba(0,0,0,.08);
  background: #fff;
  border-radius: 18px;
  padding: 14px 14px;
  box-shadow: 0 8px 22px rgba(0,0,0,.06);
  margin-bottom: 10px;
}}
.lab-card-title {{
  font-weight: 850;
  font-size: 1.05rem;
  line-height: 1.15;
}}
.lab-card-value {{
  font-family: ui-monospace, SFMono-Regular, Menlo, Consolas, monospace;
  font-size: 1.25rem;
  margin-top: 6px;
}}
.lab-meta {{
  color: rgba(15,23,42,.65);
  font-size: 12px;
  margin-top: 6px;
}}

.lab-badge {{
  display: inline-block;
  border-radius: 999px;
  padding: 2px 10px;
  font-size: 12px;
  font-weight: 700;
  color: #fff;
  margin-left: 8px;
}}
.lab-pass {{ background: {LAB_GREEN}; }}
.lab-fail {{ background: {LAB_RED}; }}

@media (max-width: 768px){{
  .lab-card {{ padding: 10px; }}
  .lab-card-value {{ font-size: 1.05rem; }}
}}
</style>
""",
        unsafe_allow_html=True,
    )
