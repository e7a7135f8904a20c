# __init__
