x = 1
# set y
y = 2
