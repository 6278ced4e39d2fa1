name = "x"
msg = f"{name} # not comment"
raw = r'\d+ # nope'  # regex
# trailing own line at end
