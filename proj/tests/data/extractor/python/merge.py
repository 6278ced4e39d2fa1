# first
# second
x = compute()

y = 2  # two
