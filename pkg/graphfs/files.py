from pkg_resources import resource_filename

TWO_GROUPS_FILE = resource_filename('graphfs', 'data/two_groups.csv')
